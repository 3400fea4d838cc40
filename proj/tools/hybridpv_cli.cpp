#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hybridpv/config.hpp"
#include "hybridpv/errors.hpp"
#include "hybridpv/estimator.hpp"
#include "hybridpv/metrics.hpp"
#include "hybridpv/pv_model.hpp"
#include "hybridpv/results_io.hpp"
#include "hybridpv/scenario.hpp"
#include "hybridpv/sim_engine.hpp"
#include "hybridpv/weather.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> scale;
    std::optional<double> soc_target;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "INI run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "noise/forecast seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--scale", f.scale, "average request as a fraction of the baseline");
    cmd->add_option("--soc-target", f.soc_target, "SOC reference for the MPC");
}

hpv::sim::RunConfig resolve_config(const CommonFlags& f) {
    hpv::sim::RunConfig cfg = f.config.empty() ? hpv::sim::RunConfig{} : hpv::config::load_run_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.scale) cfg.request_scale = *f.scale;
    if (f.soc_target) cfg.soc_target = *f.soc_target;
    cfg.validate();
    return cfg;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

int cmd_simulate(const CommonFlags& f) {
    const auto cfg = resolve_config(f);
    const auto log = hpv::sim::run_simulation(cfg);
    const auto m = hpv::metrics::compute_metrics(log.tracking(), cfg.metrics_tolerance_w);
    hpv::io::write_results_csv(cfg.results_path(), log);
    std::vector<std::pair<std::string, std::string>> extra;
    if (cfg.thermal_baseline) {
        const auto thermal = hpv::sim::run_thermal(log, cfg.thermal);
        const auto path = cfg.out_dir / ("thermal_" + cfg.case_label + "_seed" + std::to_string(cfg.seed) + ".csv");
        hpv::io::write_thermal_csv(path, thermal);
        extra.emplace_back("thermal_max_60s_ramp_w", fmt(hpv::sim::max_windowed_ramp(thermal)));
    }
    hpv::io::write_summary(cfg.summary_path(), log.meta, m, extra);
    std::cout << "wrote " << cfg.results_path().string() << '\n' << hpv::io::format_metrics(m);
    return 0;
}

int cmd_compare_thermal(const CommonFlags& f) {
    auto cfg = resolve_config(f);
    cfg.thermal_baseline = true;
    const auto res = hpv::sim::run_comparison_thermal(cfg);
    hpv::io::write_results_csv(cfg.results_path(), res.hybrid);
    const auto tpath = cfg.out_dir / ("thermal_" + cfg.case_label + "_seed" + std::to_string(cfg.seed) + ".csv");
    hpv::io::write_thermal_csv(tpath, res.thermal);
    const double ramp = hpv::sim::max_windowed_ramp(res.thermal);
    hpv::io::write_summary(cfg.summary_path(), res.hybrid.meta, res.hybrid_metrics,
                           {{"thermal_rmse_w", fmt(res.thermal_metrics.rmse)},
                            {"thermal_mean_abs_error_w", fmt(res.thermal_metrics.mean_abs_error)},
                            {"thermal_max_60s_ramp_w", fmt(ramp)}});
    std::cout << "hybrid_rmse_w = " << res.hybrid_metrics.rmse << '\n'
              << "thermal_rmse_w = " << res.thermal_metrics.rmse << '\n'
              << "thermal_max_60s_ramp_w = " << ramp << '\n'
              << "hybrid_ramp_w_per_s = " << res.hybrid.meta.hybrid_ramp_w_per_s << '\n'
              << "thermal_ramp_w_per_min = " << res.hybrid.meta.thermal_ramp_w_per_min << '\n';
    return 0;
}

int cmd_mpp_validate(const CommonFlags& f) {
    const auto cfg = resolve_config(f);
    const auto& ref = cfg.plant.pv;
    const auto stc = hpv::pv::array_mpp_at(ref, ref.irradiance_ref, ref.temperature_ref);
    std::cout << "stc_array v_mp = " << stc.v_mp << " V, i_mp = " << stc.i_mp << " A, p_mp = " << stc.p_mp << " W\n";

    std::FILE* csv = nullptr;
    if (f.out) {
        std::filesystem::create_directories(*f.out);
        csv = std::fopen((std::filesystem::path(*f.out) / "mpp_grid.csv").string().c_str(), "w");
        if (!csv) throw hpv::DataError("cannot write mpp_grid.csv");
        std::fputs("G,T,Pmp_closed,Pmp_sweep,rel_err\n", csv);
    }
    double worst = 0.0;
    for (int g = 100; g <= 1000; g += 100) {
        for (int t = 0; t <= 60; t += 10) {
            const auto p = hpv::pv::scale_to_conditions(ref, g, t);
            const double closed = hpv::pv::solve_mpp(p).p_mp;
            const double sweep = hpv::pv::sweep_mpp(p, 10000).p_mp;
            const double rel = std::abs(closed - sweep) / sweep;
            worst = std::max(worst, rel);
            if (csv) std::fprintf(csv, "%d,%d,%.12g,%.12g,%.6e\n", g, t, closed, sweep, rel);
        }
    }
    if (csv) std::fclose(csv);
    std::cout << "grid max relative error vs 10000-point sweep = " << worst << '\n';
    return 0;
}

int cmd_ekf_sensitivity(const CommonFlags& f, double fraction) {
    const auto cfg = resolve_config(f);
    const auto report = hpv::estimator::sensitivity_run(cfg.plant.pack, fraction, hpv::estimator::CyclingProfile{},
                                                        cfg.noise, cfg.ekf, cfg.seed);
    const auto path = cfg.out_dir / ("ekf_sensitivity_seed" + std::to_string(cfg.seed) + ".csv");
    hpv::estimator::write_sensitivity_csv(path, report);
    auto line = [](const char* name, const hpv::estimator::PhaseStats& s) {
        std::cout << name << ": discharge_bias = " << s.discharge_bias << ", charge_bias = " << s.charge_bias
                  << ", rmse = " << s.rmse << ", max_abs_after_settle = " << s.max_abs_error_after_settle << '\n';
    };
    line("base", report.base);
    line("plus", report.plus);
    line("minus", report.minus);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_metrics(const std::string& log_path, double tolerance) {
    const auto log = hpv::io::read_results_csv(log_path);
    if (log.records.empty()) {
        throw hpv::DataError(log_path + ": no rows");
    }
    std::cout << hpv::io::format_metrics(hpv::metrics::compute_metrics(log.tracking(), tolerance));
    return 0;
}

int cmd_synth_day(const CommonFlags& f) {
    const auto cfg = resolve_config(f);
    auto sc = cfg.synthetic;
    sc.t_start = 0.0;
    sc.t_end = 24.0 * 3600.0;
    const auto w = hpv::weather::synthetic_day(sc, cfg.weather_seed);
    hpv::scenario::RegdSynthParams rp;
    rp.capacity = cfg.regulation_capacity;
    rp.activation = cfg.regulation_activation;
    rp.reversion_time = cfg.regulation_reversion;
    const auto reg = hpv::scenario::synth_regd(rp, cfg.regulation_seed);
    const auto wpath = cfg.out_dir / ("weather_synthetic_seed" + std::to_string(cfg.weather_seed) + ".csv");
    const auto rpath = cfg.out_dir / ("regulation_synthetic_seed" + std::to_string(cfg.regulation_seed) + ".csv");
    hpv::weather::write_weather_csv(wpath, w);
    hpv::scenario::write_regulation_csv(rpath, reg);
    std::cout << "wrote " << wpath.string() << " (synthetic, not measured data)\nwrote " << rpath.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid PV + battery plant simulator with adaptive MPC"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* simulate = app.add_subcommand("simulate", "closed-loop day simulation");
    add_common(simulate, flags);
    auto* mpp = app.add_subcommand("mpp-validate", "closed-form MPP against brute-force sweeps");
    add_common(mpp, flags);
    double fraction = 0.05;
    auto* ekf = app.add_subcommand("ekf-sensitivity", "EKF under +/- parameter perturbation");
    add_common(ekf, flags);
    ekf->add_option("--fraction", fraction, "relative perturbation of all pack parameters")->check(CLI::Range(0.0, 0.5));
    auto* compare = app.add_subcommand("compare-thermal", "same setpoints through the hybrid plant and a thermal unit");
    add_common(compare, flags);
    std::string log_path;
    double tolerance = 1000.0;
    auto* metrics = app.add_subcommand("metrics", "recompute metrics from a results CSV");
    metrics->add_option("log", log_path, "results CSV")->required()->check(CLI::ExistingFile);
    metrics->add_option("--tolerance", tolerance, "reserve tolerance [W]");
    auto* synth = app.add_subcommand("synth-day", "write a synthetic weather day and regulation trace");
    add_common(synth, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*mpp) return cmd_mpp_validate(flags);
        if (*ekf) return cmd_ekf_sensitivity(flags, fraction);
        if (*compare) return cmd_compare_thermal(flags);
        if (*metrics) return cmd_metrics(log_path, tolerance);
        if (*synth) return cmd_synth_day(flags);
    } catch (const hpv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const hpv::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const hpv::ModelValidityError& e) {
        std::cerr << "model validity abort: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
