#include "hybridpv/pv_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hybridpv/errors.hpp"

namespace hpv::pv {

namespace {

constexpr double kBoltzmannOverCharge = 1.380649e-23 / 1.602176634e-19;  // [V/K]
constexpr double kCelsiusToKelvin = 273.15;

// Residual of the implicit diode equation, f(i) = 0 at the operating point.
// Strictly decreasing in i.
double diode_residual(double v, double i, const DiodeParams& p) {
    const double vd = v + i * p.r_s;
    return p.i_ph - p.i_s * std::expm1(vd / p.a) - vd / p.r_sh - i;
}

double diode_residual_slope(double v, double i, const DiodeParams& p) {
    const double vd = v + i * p.r_s;
    return -p.i_s * std::exp(vd / p.a) * p.r_s / p.a - p.r_s / p.r_sh - 1.0;
}

}  // namespace

void DiodeParams::validate() const {
    if (!(a > 0.0) || !(r_s >= 0.0) || !(r_sh > 0.0) || !(i_ph >= 0.0) || !(i_s > 0.0)) {
        throw std::invalid_argument("DiodeParams: requires a > 0, Rs >= 0, Rsh > 0, Iph >= 0, Is > 0");
    }
}

void PvReferenceParams::validate() const {
    stc.validate();
    if (n_series < 1 || n_parallel < 1 || cells_in_series < 1) {
        throw std::invalid_argument("PvReferenceParams: module and array counts must be >= 1");
    }
    if (!(irradiance_ref > 0.0)) {
        throw std::invalid_argument("PvReferenceParams: reference irradiance must be positive");
    }
}

double lambert_w(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("lambert_w: argument must be finite and non-negative");
    }
    if (x == 0.0) {
        return 0.0;
    }

    double w;
    if (x < 2.0) {
        // Winitzki's approximation, good to a few percent on [0, 2].
        const double l = std::log1p(x);
        w = l * (1.0 - std::log1p(l) / (2.0 + l));
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    // Halley iteration on w*e^w - x.
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        const double next = w - f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if (std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(next))) {
            return next;
        }
        w = next;
    }
    return w;
}

DiodeParams scale_to_conditions(const PvReferenceParams& ref, double g, double t_cell) {
    const double t_ref_k = ref.temperature_ref + kCelsiusToKelvin;
    const double t_k = t_cell + kCelsiusToKelvin;
    const double ideality = ref.stc.a / (ref.cells_in_series * kBoltzmannOverCharge * t_ref_k);

    DiodeParams out = ref.stc;
    out.a = ref.stc.a * t_k / t_ref_k;
    out.i_ph = std::max(0.0, (g / ref.irradiance_ref) *
                                 (ref.stc.i_ph + ref.isc_temp_coeff * (t_cell - ref.temperature_ref)));
    const double ratio = t_k / t_ref_k;
    out.i_s = ref.stc.i_s * ratio * ratio * ratio *
              std::exp(ref.bandgap_ev / (ideality * kBoltzmannOverCharge) * (1.0 / t_ref_k - 1.0 / t_k));
    return out;
}

MppResult solve_mpp(const DiodeParams& p) {
    p.validate();
    if (p.i_ph == 0.0) {
        return {};
    }
    const double w = lambert_w(p.i_ph * std::numbers::e / p.i_s);
    MppResult r;
    r.w = w;
    r.v_mp = (1.0 + p.r_s / p.r_sh) * p.a * (w - 1.0) - p.r_s * p.i_ph * (1.0 - 1.0 / w);
    r.i_mp = p.i_ph * (1.0 - 1.0 / w) - p.a * (w - 1.0) / p.r_sh;
    if (r.v_mp <= 0.0 || r.i_mp <= 0.0) {
        // Extremely low light: the explicit point degenerates.
        return {};
    }
    r.p_mp = r.v_mp * r.i_mp;
    return r;
}

double iv_current(double v, const DiodeParams& p) {
    p.validate();
    double hi = p.i_ph;
    double lo = 0.0;
    // f(hi) <= 0 for v >= 0; walk lo down until f(lo) >= 0 (needed only above Voc).
    double span = std::max(1.0, p.i_ph);
    while (diode_residual(v, lo, p) < 0.0) {
        hi = lo;
        lo -= span;
        span *= 2.0;
        if (!std::isfinite(lo)) {
            throw ConvergenceError("iv_current: could not bracket the operating current");
        }
    }

    double i = 0.5 * (lo + hi);
    double f = diode_residual(v, i, p);
    for (int it = 0; it < 200; ++it) {
        if (f > 0.0) {
            lo = i;
        } else {
            hi = i;
        }
        double next = i - f / diode_residual_slope(v, i, p);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        i = next;
        f = diode_residual(v, i, p);
        if (std::abs(f) <= 1e-12 * std::max(1.0, p.i_ph) || hi - lo <= 1e-15 * std::max(1.0, p.i_ph)) {
            break;
        }
    }
    if (!(std::abs(f) <= 1e-9)) {
        throw ConvergenceError("iv_current: residual above 1e-9 A");
    }
    return i;
}

double open_circuit_voltage(const DiodeParams& p) {
    p.validate();
    if (p.i_ph == 0.0) {
        return 0.0;
    }
    // g(v) = Iph - Is*expm1(v/a) - v/Rsh is decreasing, g(0) > 0, g(hi) < 0.
    auto g = [&](double v) { return p.i_ph - p.i_s * std::expm1(v / p.a) - v / p.r_sh; };
    double lo = 0.0;
    double hi = p.a * std::log1p(p.i_ph / p.i_s);
    double v = hi;
    for (int it = 0; it < 200; ++it) {
        const double gv = g(v);
        if (gv > 0.0) {
            lo = v;
        } else {
            hi = v;
        }
        const double slope = -p.i_s * std::exp(v / p.a) / p.a - 1.0 / p.r_sh;
        double next = v - gv / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - v) <= 1e-13 * std::max(1.0, std::abs(v))) {
            return next;
        }
        v = next;
    }
    return v;
}

MppResult sweep_mpp(const DiodeParams& p, int points) {
    if (points < 2) {
        throw std::invalid_argument("sweep_mpp: need at least two points");
    }
    const double voc = open_circuit_voltage(p);
    MppResult best;
    if (voc <= 0.0) {
        return best;
    }
    for (int k = 0; k < points; ++k) {
        const double v = voc * static_cast<double>(k) / (points - 1);
        const double i = iv_current(v, p);
        if (v * i > best.p_mp) {
            best.v_mp = v;
            best.i_mp = i;
            best.p_mp = v * i;
        }
    }
    return best;
}

MppResult array_mpp(const MppResult& module, int n_series, int n_parallel) {
    if (n_series < 1 || n_parallel < 1) {
        throw std::invalid_argument("array_mpp: counts must be >= 1");
    }
    MppResult r = module;
    r.v_mp = module.v_mp * n_series;
    r.i_mp = module.i_mp * n_parallel;
    r.p_mp = r.v_mp * r.i_mp;
    return r;
}

MppResult array_mpp_at(const PvReferenceParams& ref, double g, double t_cell) {
    return array_mpp(solve_mpp(scale_to_conditions(ref, g, t_cell)), ref.n_series, ref.n_parallel);
}

PvReferenceParams cs6p_250p_array() {
    PvReferenceParams ref;
    ref.stc.a = 2.004021171444696;
    ref.stc.r_s = 0.17628956717945818;
    ref.stc.r_sh = 744.029633751204;
    ref.stc.i_ph = 8.872101738571972;
    ref.stc.i_s = 7.654264687473683e-08;
    ref.isc_temp_coeff = 0.00065 * 8.87;  // 0.065 %/C of Isc = 8.87 A
    ref.cells_in_series = 60;
    ref.n_series = 16;
    ref.n_parallel = 153;
    return ref;
}

}  // namespace hpv::pv
