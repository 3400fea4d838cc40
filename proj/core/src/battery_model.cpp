#include "hybridpv/battery_model.hpp"

#include <cmath>
#include <stdexcept>

namespace hpv::battery {

namespace {

void check_soc(double soc) {
    if (!(soc >= 0.0 && soc <= 1.0)) {
        throw std::domain_error("battery: soc outside [0, 1]");
    }
}

// a[0] multiplies soc^7.
constexpr int kDegree = 7;

}  // namespace

void CellParams::validate() const {
    if (!(r_s > 0.0 && r_ts > 0.0 && c_ts > 0.0 && r_tl > 0.0 && c_tl > 0.0 && capacity_ah > 0.0)) {
        throw std::invalid_argument("CellParams: resistances, capacitances and capacity must be positive");
    }
    if (!(r_ts * c_ts < r_tl * c_tl)) {
        throw std::invalid_argument("CellParams: short-term time constant must be below the long-term one");
    }
}

void PackParams::validate() const {
    if (!(r_s > 0.0 && r_ts > 0.0 && c_ts > 0.0 && r_tl > 0.0 && c_tl > 0.0 && capacity_ah > 0.0)) {
        throw std::invalid_argument("PackParams: resistances, capacitances and capacity must be positive");
    }
    if (n_series < 1 || n_parallel < 1) {
        throw std::invalid_argument("PackParams: cell counts must be >= 1");
    }
    if (!(tau_ts() < tau_tl())) {
        throw std::invalid_argument("PackParams: short-term time constant must be below the long-term one");
    }
    if (!(soc_min >= 0.2 && soc_min < soc_max && soc_max <= 1.0)) {
        throw std::invalid_argument("PackParams: SOC window must lie in [0.2, 1] with min < max");
    }
}

PackParams pack_from_cell(const CellParams& cell, int n_series, int n_parallel, double p_nominal) {
    if (n_series < 1 || n_parallel < 1) {
        throw std::invalid_argument("pack_from_cell: counts must be >= 1");
    }
    const double r_scale = static_cast<double>(n_series) / n_parallel;
    PackParams p;
    p.r_s = cell.r_s * r_scale;
    p.r_ts = cell.r_ts * r_scale;
    p.r_tl = cell.r_tl * r_scale;
    p.c_ts = cell.c_ts / r_scale;
    p.c_tl = cell.c_tl / r_scale;
    p.capacity_ah = cell.capacity_ah * n_parallel;
    p.voc_cell = cell.voc;
    p.n_series = n_series;
    p.n_parallel = n_parallel;
    p.p_nominal = p_nominal;
    return p;
}

double voc(double soc, const VocCoefficients& a) {
    check_soc(soc);
    double acc = 0.0;
    for (double c : a) {
        acc = acc * soc + c;
    }
    return acc;
}

double voc_derivative(double soc, const VocCoefficients& a) {
    check_soc(soc);
    double acc = 0.0;
    for (int k = 0; k < kDegree; ++k) {
        acc = acc * soc + (kDegree - k) * a[k];
    }
    return acc;
}

double voc_integral(double soc, const VocCoefficients& a) {
    check_soc(soc);
    double acc = 0.0;
    for (int k = 0; k <= kDegree; ++k) {
        acc = acc * soc + a[k] / (kDegree + 1 - k);
    }
    return acc * soc;
}

double pack_voc(double soc, const PackParams& p) { return p.n_series * voc(soc, p.voc_cell); }

double pack_voc_derivative(double soc, const PackParams& p) {
    return p.n_series * voc_derivative(soc, p.voc_cell);
}

double terminal_voltage(const BatteryState& s, double i_b, const PackParams& p) {
    return pack_voc(s.soc, p) - s.v_cts - s.v_ctl - p.r_s * i_b;
}

BatteryStep step_battery(const BatteryState& s, double i_b, double dt, const PackParams& p) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step_battery: dt must be positive");
    }
    // 1 - e^{-dt/tau} via expm1 keeps the semigroup property tight for small dt.
    const double g_ts = -std::expm1(-dt / p.tau_ts());
    const double g_tl = -std::expm1(-dt / p.tau_tl());

    BatteryStep out;
    out.state.soc = s.soc - i_b * dt / p.capacity_coulomb();
    out.state.v_cts = s.v_cts + (p.r_ts * i_b - s.v_cts) * g_ts;
    out.state.v_ctl = s.v_ctl + (p.r_tl * i_b - s.v_ctl) * g_tl;
    out.soc_outside_window = out.state.soc < p.soc_min || out.state.soc > p.soc_max;
    return out;
}

CellParams reference_cell() {
    CellParams c;
    c.r_s = 1.3e-3;
    c.r_ts = 2.0e-3;
    c.c_ts = 440.57;
    c.r_tl = 4.2e-3;
    c.c_tl = 17111.0;
    c.capacity_ah = 160.0 / 9.0;
    c.voc = {8.4073, -19.892, 11.497, 4.161, -4.5533, 0.34365, 0.64685, 3.5016};
    return c;
}

PackParams reference_pack() { return pack_from_cell(reference_cell(), 441, 9, 1.0e6); }

}  // namespace hpv::battery
