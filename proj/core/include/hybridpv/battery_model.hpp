#pragma once

#include <array>

namespace hpv::battery {

/// Aging factor in the SOC integral. Real-time operation: fixed at 1.
inline constexpr double kAgingFactor = 1.0;

/// Open-circuit-voltage polynomial coefficients a1..a8 of one cell;
/// a1 multiplies soc^7 and a8 is the constant term.
using VocCoefficients = std::array<double, 8>;

/// Lithium-ion cell of the second-order equivalent circuit.
struct CellParams {
    double r_s = 0.0;          ///< [ohm]
    double r_ts = 0.0;         ///< short-term branch [ohm]
    double c_ts = 0.0;         ///< short-term branch [F]
    double r_tl = 0.0;         ///< long-term branch [ohm]
    double c_tl = 0.0;         ///< long-term branch [F]
    double capacity_ah = 0.0;  ///< [Ah]
    VocCoefficients voc{};

    void validate() const;
};

/// Series/parallel pack built from identical cells.
struct PackParams {
    double r_s = 0.0;
    double r_ts = 0.0;
    double c_ts = 0.0;
    double r_tl = 0.0;
    double c_tl = 0.0;
    double capacity_ah = 0.0;
    VocCoefficients voc_cell{};
    int n_series = 1;
    int n_parallel = 1;
    double p_nominal = 0.0;  ///< [W]
    double soc_min = 0.2;    ///< lower edge of the constant-parameter region
    double soc_max = 1.0;

    double tau_ts() const { return r_ts * c_ts; }
    double tau_tl() const { return r_tl * c_tl; }
    /// Capacity in coulombs.
    double capacity_coulomb() const { return 3600.0 * capacity_ah * kAgingFactor; }

    void validate() const;
};

struct BatteryState {
    double soc = 0.0;
    double v_cts = 0.0;  ///< pack short-term branch voltage [V]
    double v_ctl = 0.0;  ///< pack long-term branch voltage [V]
};

struct BatteryStep {
    BatteryState state;
    bool soc_outside_window = false;
};

/// Resistances scale by Ns/Np, capacitances by Np/Ns, capacity by Np.
PackParams pack_from_cell(const CellParams& cell, int n_series, int n_parallel, double p_nominal);

/// Cell open-circuit voltage. Throws std::domain_error for soc outside [0, 1].
double voc(double soc, const VocCoefficients& a);
/// d voc / d soc of one cell. Same domain as voc().
double voc_derivative(double soc, const VocCoefficients& a);
/// Integral of the cell voc from 0 to soc.
double voc_integral(double soc, const VocCoefficients& a);

double pack_voc(double soc, const PackParams& p);
double pack_voc_derivative(double soc, const PackParams& p);

/// V_b = Voc(SOC) - V_Cts - V_Ctl - R_s I_b at pack level; I_b > 0 discharges.
double terminal_voltage(const BatteryState& s, double i_b, const PackParams& p);

/// Exact zero-order-hold step for a current held constant over dt.
/// Throws std::invalid_argument for dt <= 0. The SOC is not clamped.
BatteryStep step_battery(const BatteryState& s, double i_b, double dt, const PackParams& p);

/// Reference cell with the fitted Voc polynomial; capacity is chosen so that a
/// 9-parallel pack holds 160 Ah.
CellParams reference_cell();
/// 441 x 9 pack, 1 MW nominal.
PackParams reference_pack();

}  // namespace hpv::battery
