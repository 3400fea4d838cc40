#include "hybridpv/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <stdexcept>

#include "hybridpv/errors.hpp"

namespace hpv::estimator {

double EkfState::soc_report() const { return std::clamp(mean(0), 0.0, 1.0); }

battery::BatteryState EkfState::battery_state() const { return {mean(0), mean(1), mean(2)}; }

EkfState ekf_init(const battery::BatteryState& guess, const battery::PackParams& model, const EkfConfig& cfg) {
    EkfState e;
    e.mean = Vec3(guess.soc, guess.v_cts, guess.v_ctl);
    e.cov = cfg.p0_diag.asDiagonal();
    e.model = model;
    e.q_per_second = cfg.q_per_second;
    e.r = cfg.r;
    return e;
}

EkfState ekf_predict(const EkfState& e, double i_b_meas, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("ekf_predict: dt must be positive");
    }
    EkfState out = e;
    const double i_avg = e.has_last_current ? 0.5 * (e.last_current + i_b_meas) : i_b_meas;
    const auto step = battery::step_battery(e.battery_state(), i_avg, dt, e.model);
    out.mean = Vec3(step.state.soc, step.state.v_cts, step.state.v_ctl);

    const Vec3 f(1.0, std::exp(-dt / e.model.tau_ts()), std::exp(-dt / e.model.tau_tl()));
    out.cov = f.asDiagonal() * e.cov * f.asDiagonal();
    out.cov.diagonal() += e.q_per_second * dt;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    out.last_current = i_b_meas;
    out.has_last_current = true;
    return out;
}

EkfState ekf_update(const EkfState& e, double v_b_meas, double i_b_meas) {
    EkfState out = e;
    const double soc = std::clamp(e.mean(0), 0.0, 1.0);
    const double predicted = battery::pack_voc(soc, e.model) - e.mean(1) - e.mean(2) - e.model.r_s * i_b_meas;
    const double innovation = v_b_meas - predicted;

    const Eigen::RowVector3d h(battery::pack_voc_derivative(soc, e.model), -1.0, -1.0);
    const double s = (h * e.cov * h.transpose())(0, 0) + e.r;
    const Vec3 k = e.cov * h.transpose() / s;
    out.mean = e.mean + k * innovation;

    const Mat3 ikh = Mat3::Identity() - k * h;
    out.cov = ikh * e.cov * ikh.transpose() + k * e.r * k.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

battery::PackParams perturb_all(const battery::PackParams& p, double fraction) {
    battery::PackParams q = p;
    const double f = 1.0 + fraction;
    q.r_s *= f;
    q.r_ts *= f;
    q.r_tl *= f;
    q.c_ts *= f;
    q.c_tl *= f;
    q.capacity_ah *= f;
    return q;
}

double CyclingProfile::duration() const { return cycles * (discharge_s + charge_s + 2.0 * rest_s); }

double CyclingProfile::current_at(double t) const {
    if (t < 0.0 || t >= duration()) {
        return 0.0;
    }
    double tc = std::fmod(t, discharge_s + charge_s + 2.0 * rest_s);
    if (tc < discharge_s) {
        return discharge_current;
    }
    tc -= discharge_s + rest_s;
    if (tc >= 0.0 && tc < charge_s) {
        return charge_current;
    }
    return 0.0;
}

namespace {

struct Accum {
    double dis_sum = 0.0;
    int dis_n = 0;
    double chg_sum = 0.0;
    int chg_n = 0;
    double sq = 0.0;
    int n = 0;
    double max_abs = 0.0;

    void add(double err, double current) {
        if (current > 0.0) {
            dis_sum += err;
            ++dis_n;
        } else if (current < 0.0) {
            chg_sum += err;
            ++chg_n;
        }
        sq += err * err;
        ++n;
        max_abs = std::max(max_abs, std::abs(err));
    }

    PhaseStats stats() const {
        PhaseStats s;
        s.discharge_bias = dis_n ? dis_sum / dis_n : 0.0;
        s.charge_bias = chg_n ? chg_sum / chg_n : 0.0;
        s.rmse = n ? std::sqrt(sq / n) : 0.0;
        s.max_abs_error_after_settle = max_abs;
        return s;
    }
};

}  // namespace

SensitivityReport sensitivity_run(const battery::PackParams& truth, double fraction, const CyclingProfile& profile,
                                  const SensorNoise& noise, const EkfConfig& cfg, std::uint64_t seed,
                                  double settle_time) {
    if (!(profile.dt > 0.0)) {
        throw std::invalid_argument("sensitivity_run: profile dt must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> v_noise(0.0, noise.voltage_sigma);
    std::normal_distribution<double> i_noise(0.0, noise.current_sigma);

    battery::BatteryState x{profile.soc0, 0.0, 0.0};
    const battery::BatteryState guess{profile.soc0 + cfg.soc0_offset, 0.0, 0.0};
    EkfState filters[3] = {ekf_init(guess, truth, cfg), ekf_init(guess, perturb_all(truth, fraction), cfg),
                           ekf_init(guess, perturb_all(truth, -fraction), cfg)};
    Accum acc[3];

    SensitivityReport rep;
    rep.settle_time = settle_time;
    const auto steps = static_cast<long>(std::llround(profile.duration() / profile.dt));
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * profile.dt;
        const double i = profile.current_at(t);
        x = battery::step_battery(x, i, profile.dt, truth).state;
        const double t_next = t + profile.dt;
        const double i_meas = i + i_noise(rng);
        const double v_meas = battery::terminal_voltage(x, i, truth) + v_noise(rng);

        SensitivityRow row;
        row.t = t_next;
        row.soc_true = x.soc;
        row.current = i;
        for (int f = 0; f < 3; ++f) {
            filters[f] = ekf_update(ekf_predict(filters[f], i_meas, profile.dt), v_meas, i_meas);
            const double est = filters[f].mean(0);
            if (t_next > settle_time) {
                acc[f].add(est - x.soc, i);
            }
        }
        row.soc_base = filters[0].mean(0);
        row.soc_plus = filters[1].mean(0);
        row.soc_minus = filters[2].mean(0);
        rep.rows.push_back(row);
    }
    rep.base = acc[0].stats();
    rep.plus = acc[1].stats();
    rep.minus = acc[2].stats();
    return rep;
}

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "time,SOC_true,SOC_est_base,SOC_est_plus5,SOC_est_minus5\n" << std::setprecision(12);
    for (const auto& r : report.rows) {
        out << r.t << ',' << r.soc_true << ',' << r.soc_base << ',' << r.soc_plus << ',' << r.soc_minus << '\n';
    }
}

}  // namespace hpv::estimator
