#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hpv::scenario {

/// Regulation trace sampled every `period` seconds starting at t0, held
/// between samples and zero before `activation`.
struct RegulationSignal {
    double t0 = 0.0;
    double period = 2.0;
    std::vector<double> samples;  ///< [W]
    double capacity = 1.0e6;      ///< full up/down span; |sample| <= capacity/2
    double activation = 8.3 * 3600.0;

    /// Sample-and-hold value; zero before activation or before t0, last
    /// sample after the end of the trace.
    double value_at(double t) const;
    void validate() const;
};

/// Piecewise-constant baseline, one value per block.
struct BaselineSchedule {
    double t0 = 0.0;
    double block_length = 1800.0;
    std::vector<double> blocks;  ///< [W]

    double at(double t) const;
};

/// scale * baseline(t) + regulation(t).
double setpoint_at(double t, const BaselineSchedule& baseline, const RegulationSignal& reg, double scale);

struct ReservePolicy {
    double base = 500.0e3;        ///< target with no upward regulation [W]
    double relief_cap = 500.0e3;  ///< upward regulation that removes the whole target [W]

    void validate() const;
};

/// clamp(base - max(0, reg) * base / relief_cap, 0, base).
double reserve_target(double reg_now, const ReservePolicy& policy);

struct RegdSynthParams {
    double duration = 24.0 * 3600.0;
    double capacity = 1.0e6;
    double reversion_time = 90.0;  ///< mean-reversion time constant [s]
    double t0 = 0.0;
    double activation = 8.3 * 3600.0;
};

/// Mean-reverting bounded random walk at 2-s cadence, clipped to
/// +-capacity/2 and de-meaned. Deterministic in seed.
RegulationSignal synth_regd(const RegdSynthParams& params, std::uint64_t seed);

/// Reads `t_seconds,reg_watts` at 2-s cadence. Throws DataError.
RegulationSignal load_regulation_csv(const std::filesystem::path& path, double capacity, double activation);
void write_regulation_csv(const std::filesystem::path& path, const RegulationSignal& reg);

/// Reheat thermal unit: governor and turbine lags, reheater lead-lag, output
/// ramp limiter, setpoint offset.
struct ThermalParams {
    double tau_governor = 0.2;
    double tau_turbine = 0.3;
    double tau_reheater = 7.0;
    double f_hp = 0.3;
    double ramp_limit = 0.8e6;  ///< [W per minute]
    double offset = 750.0e3;    ///< [W]

    void validate() const;
};

struct ThermalUnitState {
    double governor = 0.0;
    double turbine = 0.0;
    double reheater = 0.0;  ///< lagged part of the reheater lead-lag
    double output = 0.0;
};

/// Steady state for a constant request p_ref (offset included).
ThermalUnitState thermal_init(double p_ref, const ThermalParams& params);

/// One step with p_ref held over dt. Throws std::invalid_argument unless
/// 0 < dt <= 1.
ThermalUnitState thermal_step(const ThermalUnitState& s, double p_ref, double dt, const ThermalParams& params);

}  // namespace hpv::scenario
