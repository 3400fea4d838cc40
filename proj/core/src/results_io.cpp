#include "hybridpv/results_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "csv_util.hpp"
#include "hybridpv/errors.hpp"

namespace hpv::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << std::setprecision(15);
    return out;
}

}  // namespace

void write_results_csv(const std::filesystem::path& path, const sim::ResultLog& log) {
    auto out = open_out(path);
    out << kResultsHeader << '\n';
    for (const auto& r : log.records) {
        out << r.t << ',' << r.g << ',' << r.t_cell << ',' << r.p_mp << ',' << r.p_ref << ',' << r.reserve_target
            << ',' << r.p_out << ',' << r.p_pv_ac << ',' << r.p_bess_ac << ',' << r.soc_true << ',' << r.soc_est
            << ',' << r.p_res << ',' << r.eps << ',' << r.u1 << ',' << r.u2 << ',' << r.status << '\n';
    }
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

sim::ResultLog read_results_csv(const std::filesystem::path& path) {
    const auto table = detail::read_numeric_csv(path);
    std::string joined;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        joined += (i ? "," : "") + table.header[i];
    }
    if (joined != kResultsHeader) {
        throw DataError(path.string() + ": header does not match the results schema");
    }
    sim::ResultLog log;
    const auto& c = table.columns;
    for (std::size_t i = 0; i < table.rows; ++i) {
        sim::StepRecord r;
        r.t = c[0][i];
        r.g = c[1][i];
        r.t_cell = c[2][i];
        r.p_mp = c[3][i];
        r.p_ref = c[4][i];
        r.reserve_target = c[5][i];
        r.p_out = c[6][i];
        r.p_pv_ac = c[7][i];
        r.p_bess_ac = c[8][i];
        r.soc_true = c[9][i];
        r.soc_est = c[10][i];
        r.p_res = c[11][i];
        r.eps = c[12][i];
        r.u1 = c[13][i];
        r.u2 = c[14][i];
        r.status = static_cast<int>(c[15][i]);
        log.records.push_back(r);
    }
    if (log.records.size() >= 2) {
        log.dt = log.records[1].t - log.records[0].t;
    }
    return log;
}

void write_thermal_csv(const std::filesystem::path& path, const std::vector<sim::ThermalRecord>& thermal) {
    auto out = open_out(path);
    out << kThermalHeader << '\n';
    for (const auto& r : thermal) {
        out << r.t << ',' << r.p_ref << ',' << r.output << '\n';
    }
}

std::string format_metrics(const metrics::Metrics& m) {
    std::ostringstream s;
    s << std::setprecision(10);
    s << "samples = " << m.samples << '\n'
      << "rmse_w = " << m.rmse << '\n'
      << "mean_abs_error_w = " << m.mean_abs_error << '\n'
      << "reserve_satisfaction = " << m.reserve_satisfaction << '\n'
      << "energy_out_wh = " << m.energy_out_wh << '\n'
      << "energy_ref_wh = " << m.energy_ref_wh << '\n'
      << "energy_pv_wh = " << m.energy_pv_wh << '\n'
      << "energy_bess_wh = " << m.energy_bess_wh << '\n'
      << "histogram_lower_w = " << m.histogram.lower << '\n'
      << "histogram_bin_w = " << m.histogram.width << '\n'
      << "histogram_counts =";
    for (long c : m.histogram.counts) {
        s << ' ' << c;
    }
    s << '\n';
    return s.str();
}

void write_summary(const std::filesystem::path& path, const sim::RunMetadata& meta, const metrics::Metrics& m,
                   const std::vector<std::pair<std::string, std::string>>& extra) {
    auto out = open_out(path);
    out << "case_label = " << meta.case_label << '\n'
        << "seed = " << meta.seed << '\n'
        << "hybrid_ramp_w_per_s = " << meta.hybrid_ramp_w_per_s << '\n'
        << "thermal_ramp_w_per_min = " << meta.thermal_ramp_w_per_min << '\n'
        << "mpc_solves = " << meta.mpc_solves << '\n'
        << "mpc_faults = " << meta.mpc_faults << '\n'
        << "max_kkt_residual = " << meta.max_kkt << '\n'
        << "max_qp_iterations = " << meta.max_qp_iterations << '\n'
        << "pv_clip_events = " << meta.pv_clip_events << '\n'
        << format_metrics(m);
    for (const auto& [k, v] : extra) {
        out << k << " = " << v << '\n';
    }
}

}  // namespace hpv::io
