#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybridpv/estimator.hpp"
#include "hybridpv/forecast.hpp"
#include "hybridpv/metrics.hpp"
#include "hybridpv/mpc_controller.hpp"
#include "hybridpv/plant_model.hpp"
#include "hybridpv/scenario.hpp"
#include "hybridpv/weather.hpp"

namespace hpv::sim {

struct RunConfig {
    // Data. Empty paths select the synthetic generators.
    std::filesystem::path weather_csv;
    std::filesystem::path regulation_csv;
    std::filesystem::path out_dir = "out";
    weather::SyntheticDayConfig synthetic;
    std::uint64_t weather_seed = 2024;

    // Run.
    std::uint64_t seed = 1;
    std::string case_label = "case1";
    double t_start = 7.0 * 3600.0;
    double t_end = 18.0 * 3600.0;
    double dt_sim = 1.0;
    double request_scale = 1.0;
    double soc_initial = 0.9;
    std::optional<double> baseline_override_w;
    bool regulation_enabled = true;
    double metrics_tolerance_w = 1000.0;
    bool thermal_baseline = false;
    double validity_margin = 0.02;

    // Scenario.
    double soc_target = 0.9;
    scenario::ReservePolicy reserve;
    double regulation_capacity = 1.0e6;
    double regulation_activation = 8.3 * 3600.0;
    std::uint64_t regulation_seed = 11;
    double regulation_reversion = 90.0;
    double block_length = 1800.0;

    // Modules.
    plant::PlantParameters plant;
    mpc::MpcConfig mpc;
    estimator::EkfConfig ekf;
    estimator::SensorNoise noise;
    forecast::ForecastConfig forecast;
    scenario::ThermalParams thermal;

    /// Throws ConfigError.
    void validate() const;
    /// Results and summary file names carry the label and seed.
    std::filesystem::path results_path() const;
    std::filesystem::path summary_path() const;
};

/// Solver status column: 0 optimal, 1 max_iterations, 2 infeasible.
int status_code(qp::QpStatus s);

/// State at t and the inputs held over [t, t + dt).
struct StepRecord {
    double t = 0.0;
    double g = 0.0;
    double t_cell = 0.0;
    double p_mp = 0.0;          ///< true available dc PV power
    double p_mp_preview1 = 0.0;  ///< first preview value seen by the MPC
    double p_ref = 0.0;
    double reserve_target = 0.0;
    double p_out = 0.0;
    double p_pv_ac = 0.0;
    double p_bess_ac = 0.0;
    double soc_true = 0.0;
    double soc_est = 0.0;
    double p_res = 0.0;
    double eps = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    int status = 0;
    // Not part of the CSV schema.
    plant::PlantState x;
    bool mpc_step = false;
    double kkt = 0.0;
    int qp_iterations = 0;
    int active_output_rows = 0;
    bool pv_clipped = false;
    double reg = 0.0;
};

struct RunMetadata {
    std::string case_label;
    std::uint64_t seed = 0;
    double hybrid_ramp_w_per_s = 0.0;
    double thermal_ramp_w_per_min = 0.0;
    long mpc_solves = 0;
    long mpc_faults = 0;
    double max_kkt = 0.0;
    int max_qp_iterations = 0;
    long pv_clip_events = 0;
};

struct ResultLog {
    std::vector<StepRecord> records;
    RunMetadata meta;
    double dt = 1.0;

    metrics::TrackingSeries tracking() const;
};

struct ThermalRecord {
    double t = 0.0;
    double p_ref = 0.0;  ///< request including offset
    double output = 0.0;
};

struct ComparisonResult {
    ResultLog hybrid;
    std::vector<ThermalRecord> thermal;
    metrics::Metrics hybrid_metrics;
    metrics::Metrics thermal_metrics;
};

/// Inputs shared by the hybrid and thermal runs.
struct PreparedInputs {
    weather::WeatherSeries weather;
    std::vector<double> p_mp;  ///< true P_mp per second from t_start (with horizon padding)
    scenario::RegulationSignal regulation;
    scenario::BaselineSchedule baseline;  ///< unscaled block forecasts
    std::vector<double> block_delta;     ///< forecast error per baseline block
};

/// Loads or synthesizes weather and regulation and builds the baseline.
/// Throws ConfigError / DataError.
PreparedInputs prepare_inputs(const RunConfig& cfg);

/// Closed loop. Throws ModelValidityError if the true SOC leaves the valid
/// band by more than cfg.validity_margin.
ResultLog run_simulation(const RunConfig& cfg);
ResultLog run_simulation(const RunConfig& cfg, const PreparedInputs& inputs);

/// Drives the same setpoint trace through the hybrid plant and the thermal unit.
ComparisonResult run_comparison_thermal(const RunConfig& cfg);

/// Thermal unit response to the setpoint trace of `log`.
std::vector<ThermalRecord> run_thermal(const ResultLog& log, const scenario::ThermalParams& params);

/// Re-applies the logged (u1, u2) open loop; returns the largest state
/// mismatch relative to max(1, |state|).
double replay_max_mismatch(const ResultLog& log, const plant::PlantParameters& plant);

/// 60-s windowed output change, maximum over the trace.
double max_windowed_ramp(const std::vector<ThermalRecord>& thermal, double window_s = 60.0);

}  // namespace hpv::sim
