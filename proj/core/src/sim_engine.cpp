#include "hybridpv/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hybridpv/errors.hpp"

namespace hpv::sim {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

int mpc_ratio(const RunConfig& cfg) { return static_cast<int>(std::llround(cfg.mpc.t_mpc / cfg.dt_sim)); }

double horizon_seconds(const RunConfig& cfg) { return cfg.mpc.t_mpc * cfg.mpc.p; }

// Exact one-step plant update followed by the PV availability clip.
plant::PlantState integrate_step(const plant::DiscreteModel& dm, const plant::PlantState& x, double u1, double u2,
                                 double pv_cap, bool& clipped) {
    Eigen::Matrix<double, plant::kNumInputs, 1> u(u1, u2, 0.0);
    const plant::StateVector xn = dm.ad * x.vector() + dm.bd * u;
    plant::PlantState next = plant::PlantState::from_vector(xn);
    clipped = false;
    if (next.p_pv > pv_cap) {
        next.p_pv = pv_cap;
        clipped = true;
    } else if (next.p_pv < 0.0) {
        next.p_pv = 0.0;
        clipped = true;
    }
    return next;
}

}  // namespace

void RunConfig::validate() const {
    if (!(t_end > t_start)) {
        throw ConfigError("run: end_time must exceed start_time");
    }
    if (!(dt_sim > 0.0 && dt_sim <= 1.0)) {
        throw ConfigError("run: dt_sim must lie in (0, 1] s");
    }
    const double ratio = mpc.t_mpc / dt_sim;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
        throw ConfigError("run: dt_sim must divide the MPC step");
    }
    if (!(request_scale >= 0.0)) {
        throw ConfigError("run: request_scale must be >= 0");
    }
    if (!(soc_initial > 0.0 && soc_initial <= 1.0) || !(soc_target > 0.0 && soc_target <= 1.0)) {
        throw ConfigError("run: SOC values must lie in (0, 1]");
    }
    if (!(regulation_capacity >= 0.0 && block_length > 0.0 && metrics_tolerance_w >= 0.0)) {
        throw ConfigError("scenario: invalid regulation capacity, block length or tolerance");
    }
    if (!weather_csv.empty() && !std::filesystem::exists(weather_csv)) {
        throw ConfigError("run: weather_csv not found: " + weather_csv.string());
    }
    if (!regulation_csv.empty() && !std::filesystem::exists(regulation_csv)) {
        throw ConfigError("run: regulation_csv not found: " + regulation_csv.string());
    }
    try {
        reserve.validate();
        plant.validate();
        mpc.validate();
        forecast.validate();
        thermal.validate();
        synthetic.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::filesystem::path RunConfig::results_path() const {
    return out_dir / ("results_" + case_label + "_seed" + std::to_string(seed) + ".csv");
}

std::filesystem::path RunConfig::summary_path() const {
    return out_dir / ("summary_" + case_label + "_seed" + std::to_string(seed) + ".txt");
}

int status_code(qp::QpStatus s) {
    switch (s) {
        case qp::QpStatus::optimal:
            return 0;
        case qp::QpStatus::max_iterations:
            return 1;
        case qp::QpStatus::infeasible:
            return 2;
    }
    return 2;
}

metrics::TrackingSeries ResultLog::tracking() const {
    metrics::TrackingSeries s;
    s.dt = dt;
    for (const auto& r : records) {
        s.p_out.push_back(r.p_out);
        s.p_ref.push_back(r.p_ref);
        s.p_res.push_back(r.p_res);
        s.reserve_target.push_back(r.reserve_target);
        s.p_pv.push_back(r.p_pv_ac);
        s.p_bess.push_back(r.p_bess_ac);
    }
    return s;
}

PreparedInputs prepare_inputs(const RunConfig& cfg) {
    cfg.validate();
    PreparedInputs in;
    const double t_last = cfg.t_end + horizon_seconds(cfg);

    if (cfg.weather_csv.empty()) {
        weather::SyntheticDayConfig sc = cfg.synthetic;
        sc.t_start = cfg.t_start;
        sc.t_end = t_last;
        in.weather = weather::synthetic_day(sc, cfg.weather_seed);
    } else {
        in.weather = weather::load_weather_csv(cfg.weather_csv);
        if (in.weather.t0 > cfg.t_start || in.weather.t_end() < cfg.t_end) {
            throw DataError("weather data does not cover the run window");
        }
    }

    const auto n = static_cast<std::size_t>(std::floor((t_last - cfg.t_start) / cfg.dt_sim + 1e-9)) + 1;
    in.p_mp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = cfg.t_start + static_cast<double>(k) * cfg.dt_sim;
        const std::size_t i = in.weather.index(t);
        in.p_mp[k] = cfg.plant.available_pv_power(in.weather.irradiance[i], in.weather.temperature[i]);
    }

    if (cfg.regulation_enabled) {
        if (cfg.regulation_csv.empty()) {
            scenario::RegdSynthParams rp;
            rp.duration = t_last - cfg.t_start;
            rp.capacity = cfg.regulation_capacity;
            rp.reversion_time = cfg.regulation_reversion;
            rp.t0 = cfg.t_start;
            rp.activation = cfg.regulation_activation;
            in.regulation = scenario::synth_regd(rp, cfg.regulation_seed);
        } else {
            in.regulation =
                scenario::load_regulation_csv(cfg.regulation_csv, cfg.regulation_capacity, cfg.regulation_activation);
        }
    } else {
        in.regulation.capacity = cfg.regulation_capacity;
        in.regulation.activation = cfg.regulation_activation;
    }

    // Baseline: forecast of the block-mean ac PV output, one error draw per block.
    std::mt19937_64 block_rng(derive_seed(cfg.seed, 2));
    const double bl = cfg.block_length;
    const auto first = static_cast<long>(std::floor(cfg.t_start / bl));
    const auto last = static_cast<long>(std::floor(t_last / bl));
    in.baseline.t0 = static_cast<double>(first) * bl;
    in.baseline.block_length = bl;
    for (long b = first; b <= last; ++b) {
        const double lo = std::max(static_cast<double>(b) * bl, cfg.t_start);
        const double hi = std::min(static_cast<double>(b + 1) * bl, t_last + cfg.dt_sim);
        double sum = 0.0;
        long cnt = 0;
        for (double t = lo; t < hi - 1e-9; t += cfg.dt_sim) {
            const auto k = static_cast<std::size_t>(std::llround((t - cfg.t_start) / cfg.dt_sim));
            if (k < n) {
                sum += cfg.plant.eta_pv * std::min(in.p_mp[k], cfg.plant.pv_inverter_rating);
                ++cnt;
            }
        }
        const double delta = forecast::draw_block_error(block_rng, cfg.forecast);
        in.block_delta.push_back(delta);
        const double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
        in.baseline.blocks.push_back(cfg.baseline_override_w ? *cfg.baseline_override_w
                                                             : forecast::block_forecast(mean, delta));
    }
    return in;
}

ResultLog run_simulation(const RunConfig& cfg) { return run_simulation(cfg, prepare_inputs(cfg)); }

ResultLog run_simulation(const RunConfig& cfg, const PreparedInputs& in) {
    cfg.validate();
    const auto& pp = cfg.plant;
    const auto& mc = cfg.mpc;
    const double dt = cfg.dt_sim;
    const int ratio = mpc_ratio(cfg);
    const int step_per_move = ratio;  // samples between preview points
    const auto n_rec = static_cast<std::size_t>(std::floor((cfg.t_end - cfg.t_start) / dt + 1e-9)) + 1;
    const std::size_t n_pmp = in.p_mp.size();
    auto p_mp_at = [&](std::size_t k) { return in.p_mp[std::min(k, n_pmp - 1)]; };

    // Prefix sums for the tail mean of the P_mp preview.
    std::vector<double> prefix(n_pmp + 1, 0.0);
    for (std::size_t k = 0; k < n_pmp; ++k) {
        prefix[k + 1] = prefix[k] + in.p_mp[k];
    }
    auto window_mean = [&](std::size_t a, std::size_t b) {  // inclusive
        a = std::min(a, n_pmp - 1);
        b = std::min(b, n_pmp - 1);
        return (prefix[b + 1] - prefix[a]) / static_cast<double>(b - a + 1);
    };

    auto reg_at = [&](double t) { return cfg.regulation_enabled ? in.regulation.value_at(t) : 0.0; };
    auto baseline_at = [&](double t) { return cfg.request_scale * in.baseline.at(t); };

    const plant::DiscreteModel dm = plant::discretize_zoh(plant::build_continuous(pp), dt);
    mpc::Controller controller(mc, pp);

    std::mt19937_64 sensor_rng(derive_seed(cfg.seed, 1));
    std::normal_distribution<double> v_noise(0.0, cfg.noise.voltage_sigma);
    std::normal_distribution<double> i_noise(0.0, cfg.noise.current_sigma);
    forecast::ForecastContext fctx(derive_seed(cfg.seed, 3));

    const double pv_cap0 = std::min(p_mp_at(0), pp.pv_inverter_rating);
    plant::PlantState x;
    x.soc = cfg.soc_initial;
    x.p_pv = std::clamp((baseline_at(cfg.t_start) + reg_at(cfg.t_start)) / pp.eta_pv, 0.0, pv_cap0);

    const battery::BatteryState guess{std::min(1.0, cfg.soc_initial + cfg.ekf.soc0_offset), 0.0, 0.0};
    estimator::EkfState ekf = estimator::ekf_init(guess, pp.pack, cfg.ekf);

    const double soc_lo = mc.y_min[2] - cfg.validity_margin;
    const double soc_hi = mc.y_max[2] + cfg.validity_margin;

    ResultLog log;
    log.dt = dt;
    log.records.reserve(n_rec);
    log.meta.case_label = cfg.case_label;
    log.meta.seed = cfg.seed;
    log.meta.hybrid_ramp_w_per_s =
        pp.eta_pv * pp.ppv_rate + pp.eta_discharge * pp.ib_rate * battery::pack_voc(0.5, pp.pack);
    log.meta.thermal_ramp_w_per_min = cfg.thermal.ramp_limit;

    mpc::ControlMove move;
    double preview1 = p_mp_at(0);
    std::vector<double> p_mp_preview(static_cast<std::size_t>(mc.p));
    std::vector<double> baseline_preview(static_cast<std::size_t>(mc.p));
    std::vector<double> truth_near(static_cast<std::size_t>(mc.m));

    for (std::size_t k = 0; k < n_rec; ++k) {
        const double t = cfg.t_start + static_cast<double>(k) * dt;

        // Sensors and estimator.
        const double i_meas = x.i_b + i_noise(sensor_rng);
        const double v_meas = battery::terminal_voltage(x.battery(), x.i_b, pp.pack) + v_noise(sensor_rng);
        if (k > 0) {
            ekf = estimator::ekf_predict(ekf, i_meas, dt);
        }
        ekf = estimator::ekf_update(ekf, v_meas, i_meas);

        forecast::advance_error(fctx, dt, cfg.forecast);

        const double reg_now = reg_at(t);
        StepRecord rec;
        if (k % static_cast<std::size_t>(ratio) == 0) {
            for (int i = 0; i < mc.m; ++i) {
                truth_near[static_cast<std::size_t>(i)] =
                    p_mp_at(k + static_cast<std::size_t>((i + 1) * step_per_move));
            }
            const auto near = forecast::nowcast_preview(truth_near, fctx.e, mc.t_mpc, cfg.forecast);
            const std::size_t block = static_cast<std::size_t>(std::clamp(
                std::floor((t - in.baseline.t0) / in.baseline.block_length), 0.0,
                static_cast<double>(in.block_delta.size() - 1)));
            double tail = 0.0;
            if (mc.p > mc.m) {
                const double mean = window_mean(k + static_cast<std::size_t>((mc.m + 1) * step_per_move),
                                                k + static_cast<std::size_t>(mc.p * step_per_move));
                tail = forecast::block_forecast(mean, in.block_delta[block]);
            }
            for (int i = 0; i < mc.p; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                p_mp_preview[ui] = i < mc.m ? near[ui] : tail;
                baseline_preview[ui] = baseline_at(t + mc.t_mpc * (i + 1));
            }
            const auto refs = mpc::reference_builder(baseline_preview, reg_now, cfg.soc_target, cfg.reserve,
                                                     p_mp_preview);
            plant::PlantState x_est{ekf.mean(0), ekf.mean(1), ekf.mean(2), i_meas, x.p_pv};
            move = controller.solve_step(x_est, refs);
            preview1 = p_mp_preview.front();

            rec.mpc_step = true;
            rec.kkt = move.kkt_residual;
            rec.qp_iterations = move.iterations;
            rec.active_output_rows = move.active_output_rows;
            ++log.meta.mpc_solves;
            log.meta.mpc_faults += move.fault ? 1 : 0;
            log.meta.max_kkt = std::max(log.meta.max_kkt, move.kkt_residual);
            log.meta.max_qp_iterations = std::max(log.meta.max_qp_iterations, move.iterations);
        }

        const double p_mp = p_mp_at(k);
        const std::size_t wi = in.weather.index(t);
        const plant::PlantOutputs y = plant::output_map(x, p_mp, pp);

        rec.t = t;
        rec.g = in.weather.irradiance[wi];
        rec.t_cell = in.weather.temperature[wi];
        rec.p_mp = p_mp;
        rec.p_mp_preview1 = preview1;
        rec.p_ref = baseline_at(t) + reg_now;
        rec.reserve_target = scenario::reserve_target(reg_now, cfg.reserve);
        rec.p_out = y.p_out;
        rec.p_pv_ac = pp.eta_pv * x.p_pv;
        rec.p_bess_ac = plant::battery_ac_power(x, pp);
        rec.soc_true = x.soc;
        rec.soc_est = ekf.soc_report();
        rec.p_res = y.p_res;
        rec.eps = move.eps;
        rec.u1 = move.u1;
        rec.u2 = move.u2;
        rec.status = status_code(move.status);
        rec.x = x;
        rec.reg = reg_now;

        bool clipped = false;
        const double cap_next = std::min(p_mp_at(k + 1), pp.pv_inverter_rating);
        x = integrate_step(dm, x, move.u1, move.u2, cap_next, clipped);
        if (clipped && k + 1 < n_rec) {
            ++log.meta.pv_clip_events;
            rec.pv_clipped = true;
        }
        log.records.push_back(rec);

        if (!(x.soc >= soc_lo && x.soc <= soc_hi)) {
            std::ostringstream msg;
            msg << "SOC " << x.soc << " left the valid band [" << soc_lo << ", " << soc_hi << "] at t = " << t + dt
                << " s";
            throw ModelValidityError(msg.str());
        }
    }
    return log;
}

std::vector<ThermalRecord> run_thermal(const ResultLog& log, const scenario::ThermalParams& params) {
    std::vector<ThermalRecord> out;
    if (log.records.empty()) {
        return out;
    }
    out.reserve(log.records.size());
    scenario::ThermalUnitState s = scenario::thermal_init(log.records.front().p_ref, params);
    for (const auto& r : log.records) {
        out.push_back({r.t, r.p_ref + params.offset, s.output});
        s = scenario::thermal_step(s, r.p_ref, log.dt, params);
    }
    return out;
}

ComparisonResult run_comparison_thermal(const RunConfig& cfg) {
    ComparisonResult res;
    res.hybrid = run_simulation(cfg);
    res.thermal = run_thermal(res.hybrid, cfg.thermal);
    res.hybrid_metrics = metrics::compute_metrics(res.hybrid.tracking(), cfg.metrics_tolerance_w);

    metrics::TrackingSeries ts;
    ts.dt = res.hybrid.dt;
    for (const auto& r : res.thermal) {
        ts.p_out.push_back(r.output);
        ts.p_ref.push_back(r.p_ref);
        ts.p_res.push_back(0.0);
        ts.reserve_target.push_back(0.0);
        ts.p_pv.push_back(0.0);
        ts.p_bess.push_back(0.0);
    }
    res.thermal_metrics = metrics::compute_metrics(ts, cfg.metrics_tolerance_w);
    return res;
}

double replay_max_mismatch(const ResultLog& log, const plant::PlantParameters& plant) {
    if (log.records.size() < 2) {
        return 0.0;
    }
    const plant::DiscreteModel dm = plant::discretize_zoh(plant::build_continuous(plant), log.dt);
    plant::PlantState x = log.records.front().x;
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < log.records.size(); ++k) {
        const auto& r = log.records[k];
        bool clipped = false;
        x = integrate_step(dm, x, r.u1, r.u2, std::min(log.records[k + 1].p_mp, plant.pv_inverter_rating), clipped);
        const plant::StateVector a = x.vector();
        const plant::StateVector b = log.records[k + 1].x.vector();
        for (int j = 0; j < plant::kNumStates; ++j) {
            worst = std::max(worst, std::abs(a(j) - b(j)) / std::max(1.0, std::abs(b(j))));
        }
    }
    return worst;
}

double max_windowed_ramp(const std::vector<ThermalRecord>& thermal, double window_s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < thermal.size(); ++i) {
        for (std::size_t j = i + 1; j < thermal.size() && thermal[j].t - thermal[i].t <= window_s + 1e-9; ++j) {
            worst = std::max(worst, std::abs(thermal[j].output - thermal[i].output));
        }
    }
    return worst;
}

}  // namespace hpv::sim
