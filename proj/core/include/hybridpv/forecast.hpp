#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hpv::forecast {

enum class BlockErrorKind { uniform, gaussian };

struct ForecastConfig {
    double sigma60 = 0.082;         ///< target std of the 60-s-ahead relative error
    double resample_period = 180.0;  ///< [s]
    double filter_tau = 60.0;       ///< [s]
    double taper_floor = 0.05;      ///< taper at the shortest lead time
    double taper_t0 = 3.0;          ///< [s]
    double taper_t1 = 60.0;         ///< [s]
    double block_error = 0.10;      ///< half-width (uniform) or std (gaussian)
    BlockErrorKind block_kind = BlockErrorKind::uniform;
    /// Inflate the raw draw so the time-averaged std of the filtered error
    /// equals sigma60 (otherwise the low-pass shrinks it by ~17 %).
    bool compensate_filter = true;

    void validate() const;
};

/// Std of e_raw that yields a time-averaged std of sigma60 for e.
double raw_sigma(const ForecastConfig& cfg);

/// Linear in lead time from taper_floor at taper_t0 to 1 at taper_t1,
/// clamped outside that range.
double taper(double lead_seconds, const ForecastConfig& cfg);

struct ForecastContext {
    double e_raw = 0.0;
    double e = 0.0;
    double since_resample = 0.0;
    bool started = false;
    std::mt19937_64 rng;

    explicit ForecastContext(std::uint64_t seed = 0) : rng(seed) {}
};

/// Draws a new e_raw on the resample grid and low-passes e toward it.
/// Throws std::invalid_argument for dt <= 0.
void advance_error(ForecastContext& ctx, double dt, const ForecastConfig& cfg);

/// truth[i] * (1 + taper(lead[i]) * e) for i < truth.size(), lead = t_mpc * (i + 1).
std::vector<double> nowcast_preview(const std::vector<double>& future_true, double e, double t_mpc,
                                    const ForecastConfig& cfg);

/// One relative error draw for a block.
double draw_block_error(std::mt19937_64& rng, const ForecastConfig& cfg);

/// mean * (1 + delta); zero mean stays zero. Throws std::invalid_argument for
/// a negative mean.
double block_forecast(double true_window_mean, double delta);

}  // namespace hpv::forecast
