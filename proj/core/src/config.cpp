#include "hybridpv/config.hpp"

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hybridpv/errors.hpp"

namespace hpv::config {

namespace {

using Setter = std::function<void(const std::string&)>;
using Registry = std::map<std::string, std::map<std::string, Setter>>;

double to_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return v;
}

long long to_int(const std::string& s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("not an integer: '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

template <std::size_t N>
std::array<double, N> to_array(const std::string& s) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, s, [](char c) { return c == ','; });
    if (parts.size() != N) {
        throw ConfigError("expected " + std::to_string(N) + " comma-separated values, got '" + s + "'");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        boost::algorithm::trim(parts[i]);
        out[i] = to_double(parts[i]);
    }
    return out;
}

Setter num(double& target) {
    return [&target](const std::string& v) { target = to_double(v); };
}
Setter integer(int& target) {
    return [&target](const std::string& v) { target = static_cast<int>(to_int(v)); };
}
Setter seed(std::uint64_t& target) {
    return [&target](const std::string& v) {
        const long long s = to_int(v);
        if (s < 0) throw ConfigError("seed must be >= 0");
        target = static_cast<std::uint64_t>(s);
    };
}
Setter flag(bool& target) {
    return [&target](const std::string& v) { target = to_bool(v); };
}
template <std::size_t N>
Setter arr(std::array<double, N>& target) {
    return [&target](const std::string& v) { target = to_array<N>(v); };
}

struct Staging {
    battery::CellParams cell = battery::reference_cell();
    double pack_capacity_ah = 160.0;
    int n_series = 441;
    int n_parallel = 9;
    double p_nominal = 1.0e6;
    double soc_min = 0.2;
    double soc_max = 1.0;
    std::string weather_csv;
    std::string regulation_csv;
    std::string synthetic_kind = "intermittent";
    std::string block_kind = "uniform";
    double baseline_override = -1.0;
    double voltage_sigma = 1.6;
    double r_override = -1.0;
};

Registry make_registry(sim::RunConfig& c, Staging& st) {
    Registry r;
    auto& run = r["run"];
    run["weather_csv"] = [&st](const std::string& v) { st.weather_csv = v; };
    run["regulation_csv"] = [&st](const std::string& v) { st.regulation_csv = v; };
    run["out_dir"] = [&c](const std::string& v) { c.out_dir = v; };
    run["seed"] = seed(c.seed);
    run["weather_seed"] = seed(c.weather_seed);
    run["case_label"] = [&c](const std::string& v) {
        if (v.empty() || v.find_first_of("/\\ ") != std::string::npos) {
            throw ConfigError("case_label must be a non-empty word");
        }
        c.case_label = v;
    };
    run["start_time_s"] = num(c.t_start);
    run["end_time_s"] = num(c.t_end);
    run["dt_sim"] = num(c.dt_sim);
    run["request_scale"] = num(c.request_scale);
    run["soc_initial"] = num(c.soc_initial);
    run["baseline_override_w"] = num(st.baseline_override);
    run["regulation_enabled"] = flag(c.regulation_enabled);
    run["metrics_tolerance_w"] = num(c.metrics_tolerance_w);
    run["thermal_baseline"] = flag(c.thermal_baseline);
    run["validity_margin"] = num(c.validity_margin);

    auto& syn = r["synthetic"];
    syn["kind"] = [&st](const std::string& v) { st.synthetic_kind = v; };
    syn["sunrise_s"] = num(c.synthetic.sunrise);
    syn["sunset_s"] = num(c.synthetic.sunset);
    syn["peak_irradiance"] = num(c.synthetic.peak_irradiance);
    syn["clear_mean_dwell_s"] = num(c.synthetic.clear_mean_dwell);
    syn["cloudy_mean_dwell_s"] = num(c.synthetic.cloudy_mean_dwell);
    syn["cloudy_k_min"] = num(c.synthetic.cloudy_k_min);
    syn["cloudy_k_max"] = num(c.synthetic.cloudy_k_max);
    syn["edge_min_s"] = num(c.synthetic.edge_min);
    syn["edge_max_s"] = num(c.synthetic.edge_max);
    syn["ambient_min_c"] = num(c.synthetic.ambient_min);
    syn["ambient_max_c"] = num(c.synthetic.ambient_max);
    syn["heating_coeff"] = num(c.synthetic.heating_coeff);
    syn["constant_irradiance"] = num(c.synthetic.constant_irradiance);
    syn["constant_temperature"] = num(c.synthetic.constant_temperature);

    auto& sc = r["scenario"];
    sc["soc_target"] = num(c.soc_target);
    sc["reserve_base_w"] = num(c.reserve.base);
    sc["reserve_relief_cap_w"] = num(c.reserve.relief_cap);
    sc["regulation_capacity_w"] = num(c.regulation_capacity);
    sc["regulation_activation_s"] = num(c.regulation_activation);
    sc["regulation_seed"] = seed(c.regulation_seed);
    sc["regulation_reversion_s"] = num(c.regulation_reversion);
    sc["block_length_s"] = num(c.block_length);

    auto& pl = r["plant"];
    pl["pv_arrays"] = integer(c.plant.pv_arrays);
    pl["pv_inverter_rating_w"] = num(c.plant.pv_inverter_rating);
    pl["eta_pv"] = num(c.plant.eta_pv);
    pl["eta_charge"] = num(c.plant.eta_charge);
    pl["eta_discharge"] = num(c.plant.eta_discharge);
    pl["ib_rate"] = num(c.plant.ib_rate);
    pl["ppv_rate"] = num(c.plant.ppv_rate);

    auto& pv = r["pv"];
    pv["a"] = num(c.plant.pv.stc.a);
    pv["r_s"] = num(c.plant.pv.stc.r_s);
    pv["r_sh"] = num(c.plant.pv.stc.r_sh);
    pv["i_ph"] = num(c.plant.pv.stc.i_ph);
    pv["i_s"] = num(c.plant.pv.stc.i_s);
    pv["isc_temp_coeff"] = num(c.plant.pv.isc_temp_coeff);
    pv["irradiance_ref"] = num(c.plant.pv.irradiance_ref);
    pv["temperature_ref"] = num(c.plant.pv.temperature_ref);
    pv["cells_in_series"] = integer(c.plant.pv.cells_in_series);
    pv["bandgap_ev"] = num(c.plant.pv.bandgap_ev);
    pv["n_series"] = integer(c.plant.pv.n_series);
    pv["n_parallel"] = integer(c.plant.pv.n_parallel);

    auto& bt = r["battery"];
    bt["cell_r_s"] = num(st.cell.r_s);
    bt["cell_r_ts"] = num(st.cell.r_ts);
    bt["cell_c_ts"] = num(st.cell.c_ts);
    bt["cell_r_tl"] = num(st.cell.r_tl);
    bt["cell_c_tl"] = num(st.cell.c_tl);
    bt["pack_capacity_ah"] = num(st.pack_capacity_ah);
    for (std::size_t i = 0; i < 8; ++i) {
        bt["voc_a" + std::to_string(i + 1)] = num(st.cell.voc[i]);
    }
    bt["n_series"] = integer(st.n_series);
    bt["n_parallel"] = integer(st.n_parallel);
    bt["p_nominal_w"] = num(st.p_nominal);
    bt["soc_min"] = num(st.soc_min);
    bt["soc_max"] = num(st.soc_max);

    auto& mp = r["mpc"];
    mp["t_mpc"] = num(c.mpc.t_mpc);
    mp["p"] = integer(c.mpc.p);
    mp["m"] = integer(c.mpc.m);
    mp["w_y"] = arr(c.mpc.w_y);
    mp["s_y"] = arr(c.mpc.s_y);
    mp["w_du"] = arr(c.mpc.w_du);
    mp["s_du"] = arr(c.mpc.s_du);
    mp["ecr_min"] = arr(c.mpc.ecr_min);
    mp["ecr_max"] = arr(c.mpc.ecr_max);
    mp["u_min"] = arr(c.mpc.u_min);
    mp["u_max"] = arr(c.mpc.u_max);
    mp["y_min"] = arr(c.mpc.y_min);
    mp["y_max"] = arr(c.mpc.y_max);
    mp["rho_eps"] = num(c.mpc.rho_eps);
    mp["max_qp_iterations"] = integer(c.mpc.max_qp_iterations);

    auto& es = r["estimator"];
    es["q_soc"] = num(c.ekf.q_per_second(0));
    es["q_vts"] = num(c.ekf.q_per_second(1));
    es["q_vtl"] = num(c.ekf.q_per_second(2));
    es["p0_soc"] = num(c.ekf.p0_diag(0));
    es["p0_vts"] = num(c.ekf.p0_diag(1));
    es["p0_vtl"] = num(c.ekf.p0_diag(2));
    es["soc0_offset"] = num(c.ekf.soc0_offset);
    es["voltage_sigma"] = num(st.voltage_sigma);
    es["current_sigma"] = num(c.noise.current_sigma);
    es["r"] = num(st.r_override);

    auto& fc = r["forecast"];
    fc["sigma60"] = num(c.forecast.sigma60);
    fc["resample_period_s"] = num(c.forecast.resample_period);
    fc["filter_tau_s"] = num(c.forecast.filter_tau);
    fc["taper_floor"] = num(c.forecast.taper_floor);
    fc["taper_t0_s"] = num(c.forecast.taper_t0);
    fc["taper_t1_s"] = num(c.forecast.taper_t1);
    fc["block_error"] = num(c.forecast.block_error);
    fc["block_kind"] = [&st](const std::string& v) { st.block_kind = v; };
    fc["compensate_filter"] = flag(c.forecast.compensate_filter);

    auto& th = r["thermal"];
    th["tau_governor_s"] = num(c.thermal.tau_governor);
    th["tau_turbine_s"] = num(c.thermal.tau_turbine);
    th["tau_reheater_s"] = num(c.thermal.tau_reheater);
    th["f_hp"] = num(c.thermal.f_hp);
    th["ramp_limit_w_per_min"] = num(c.thermal.ramp_limit);
    th["offset_w"] = num(c.thermal.offset);
    return r;
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) {
        return {};
    }
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

sim::RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    sim::RunConfig cfg;
    Staging st;
    Registry reg = make_registry(cfg, st);
    for (const auto& [section, body] : tree) {
        const auto sec = reg.find(section);
        if (sec == reg.end()) {
            throw ConfigError("unknown config section [" + section + "]");
        }
        if (!body.data().empty() && body.empty()) {
            throw ConfigError("key '" + section + "' outside any section");
        }
        for (const auto& [key, node] : body) {
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end()) {
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            }
            std::string value = node.data();
            boost::algorithm::trim(value);
            try {
                setter->second(value);
            } catch (const ConfigError& e) {
                throw ConfigError("[" + section + "] " + key + ": " + e.what());
            }
        }
    }

    if (st.synthetic_kind == "clear") {
        cfg.synthetic.kind = weather::SyntheticKind::clear;
    } else if (st.synthetic_kind == "intermittent") {
        cfg.synthetic.kind = weather::SyntheticKind::intermittent;
    } else if (st.synthetic_kind == "constant") {
        cfg.synthetic.kind = weather::SyntheticKind::constant;
    } else {
        throw ConfigError("[synthetic] kind must be clear, intermittent or constant");
    }
    if (st.block_kind == "uniform") {
        cfg.forecast.block_kind = forecast::BlockErrorKind::uniform;
    } else if (st.block_kind == "gaussian") {
        cfg.forecast.block_kind = forecast::BlockErrorKind::gaussian;
    } else {
        throw ConfigError("[forecast] block_kind must be uniform or gaussian");
    }
    if (st.baseline_override >= 0.0) {
        cfg.baseline_override_w = st.baseline_override;
    }
    cfg.noise.voltage_sigma = st.voltage_sigma;
    cfg.ekf.r = st.r_override > 0.0 ? st.r_override : st.voltage_sigma * st.voltage_sigma;
    cfg.weather_csv = resolve(st.weather_csv, base_dir);
    cfg.regulation_csv = resolve(st.regulation_csv, base_dir);

    if (st.n_parallel < 1 || st.n_series < 1 || !(st.pack_capacity_ah > 0.0)) {
        throw ConfigError("[battery] cell counts must be >= 1 and capacity positive");
    }
    st.cell.capacity_ah = st.pack_capacity_ah / st.n_parallel;
    try {
        st.cell.validate();
        cfg.plant.pack = battery::pack_from_cell(st.cell, st.n_series, st.n_parallel, st.p_nominal);
        cfg.plant.pack.soc_min = st.soc_min;
        cfg.plant.pack.soc_max = st.soc_max;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[battery] ") + e.what());
    }
    cfg.validate();
    return cfg;
}

sim::RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

}  // namespace hpv::config
