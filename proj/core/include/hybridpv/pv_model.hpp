#pragma once

namespace hpv::pv {

/// Five single-diode parameters of one module at a given operating condition.
struct DiodeParams {
    double a = 0.0;     ///< modified ideality factor n*Ns*k*T/q [V]
    double r_s = 0.0;   ///< series resistance [ohm]
    double r_sh = 0.0;  ///< shunt resistance [ohm]
    double i_ph = 0.0;  ///< photocurrent [A]
    double i_s = 0.0;   ///< diode saturation current [A]

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// Module reference parameters plus the array wiring.
struct PvReferenceParams {
    DiodeParams stc;                   ///< fitted at 1000 W/m2, 25 C
    double isc_temp_coeff = 0.0;       ///< dIsc/dT [A/C]
    double irradiance_ref = 1000.0;    ///< [W/m2]
    double temperature_ref = 25.0;     ///< [C]
    int cells_in_series = 60;          ///< cells per module, for the band-gap law
    double bandgap_ev = 1.12;
    int n_series = 1;                  ///< modules in series per string
    int n_parallel = 1;                ///< strings in parallel

    void validate() const;
};

struct MppResult {
    double v_mp = 0.0;
    double i_mp = 0.0;
    double p_mp = 0.0;
    double w = 0.0;  ///< Lambert-W value the point was computed from (0 for sweeps)
};

/// Principal branch W0 of the Lambert W function for x >= 0.
/// Throws std::domain_error for negative or non-finite arguments.
double lambert_w(double x);

/// Translates STC parameters to irradiance g [W/m2] and cell temperature
/// t_cell [C]. Photocurrent is linear in g and in temperature, the saturation
/// current follows the cubic/band-gap law and `a` is proportional to absolute
/// temperature.
DiodeParams scale_to_conditions(const PvReferenceParams& ref, double g, double t_cell);

/// Explicit maximum power point from the Lambert-W expressions.
/// Returns an all-zero result for a dark module (i_ph == 0).
MppResult solve_mpp(const DiodeParams& p);

/// Output current at terminal voltage v, solving the implicit single-diode
/// equation with a bracketed Newton iteration. Throws ConvergenceError if the
/// residual stays above 1e-9 A.
double iv_current(double v, const DiodeParams& p);

/// Terminal voltage at zero current.
double open_circuit_voltage(const DiodeParams& p);

/// Brute-force maximum of V*I over `points` evenly spaced voltages in [0, Voc].
MppResult sweep_mpp(const DiodeParams& p, int points = 10000);

/// Scales a module MPP to an array under uniform irradiance.
MppResult array_mpp(const MppResult& module, int n_series, int n_parallel);

/// Module MPP at (g, t_cell) scaled to one array of `ref`.
MppResult array_mpp_at(const PvReferenceParams& ref, double g, double t_cell);

/// CS6P-250P fit (see tools/fit_module_params.py) wired 16 series x 153 parallel.
PvReferenceParams cs6p_250p_array();

}  // namespace hpv::pv
