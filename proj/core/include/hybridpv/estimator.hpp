#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hybridpv/battery_model.hpp"

namespace hpv::estimator {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct SensorNoise {
    double voltage_sigma = 1.6;  ///< 0.1 % of 1600 V full scale
    double current_sigma = 3.25;  ///< 0.5 % of 650 A full scale
};

struct EkfConfig {
    Vec3 q_per_second{1e-10, 1e-6, 1e-6};  ///< process noise diagonal per second
    double r = 1.6 * 1.6;                  ///< voltage measurement variance [V^2]
    Vec3 p0_diag{0.01, 1.0, 1.0};
    double soc0_offset = 0.05;  ///< initial guess minus truth
};

/// Filter over (SOC, V_Cts, V_Ctl) carrying its own (possibly perturbed)
/// pack model.
struct EkfState {
    Vec3 mean = Vec3::Zero();
    Mat3 cov = Mat3::Identity();
    battery::PackParams model;
    Vec3 q_per_second = Vec3::Zero();
    double r = 1.0;
    double last_current = 0.0;  ///< previous measured current for the predict step
    bool has_last_current = false;

    /// SOC clamped to [0, 1]; the mean itself is not clamped.
    double soc_report() const;
    battery::BatteryState battery_state() const;
};

EkfState ekf_init(const battery::BatteryState& guess, const battery::PackParams& model, const EkfConfig& cfg);

/// Propagates the mean with the exact battery step (current averaged over
/// the previous and present measurement) and P <- F P F' + Q dt.
/// Throws std::invalid_argument for dt <= 0.
EkfState ekf_predict(const EkfState& e, double i_b_meas, double dt);

/// Scalar terminal-voltage update with a Joseph-form covariance update.
EkfState ekf_update(const EkfState& e, double v_b_meas, double i_b_meas);

/// Scales R_s, R_ts, R_tl, capacity, C_ts and C_tl by (1 + fraction).
battery::PackParams perturb_all(const battery::PackParams& p, double fraction);

struct CyclingProfile {
    double soc0 = 0.75;
    int cycles = 3;
    double discharge_current = 300.0;
    double discharge_s = 600.0;
    double rest_s = 60.0;
    double charge_current = -300.0;
    double charge_s = 600.0;
    double dt = 1.0;

    /// Current applied over [t, t + dt).
    double current_at(double t) const;
    double duration() const;
};

struct SensitivityRow {
    double t = 0.0;
    double soc_true = 0.0;
    double soc_base = 0.0;
    double soc_plus = 0.0;
    double soc_minus = 0.0;
    double current = 0.0;
};

struct PhaseStats {
    double discharge_bias = 0.0;  ///< mean (estimate - truth) while discharging
    double charge_bias = 0.0;
    double rmse = 0.0;
    double max_abs_error_after_settle = 0.0;
};

struct SensitivityReport {
    std::vector<SensitivityRow> rows;
    PhaseStats base;
    PhaseStats plus;
    PhaseStats minus;
    double settle_time = 300.0;
};

/// Runs truth and three filters (0, +fraction, -fraction) on the same noisy
/// measurements. Statistics exclude the first settle_time seconds.
SensitivityReport sensitivity_run(const battery::PackParams& truth, double fraction, const CyclingProfile& profile,
                                  const SensorNoise& noise, const EkfConfig& cfg, std::uint64_t seed,
                                  double settle_time = 300.0);

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report);

}  // namespace hpv::estimator
