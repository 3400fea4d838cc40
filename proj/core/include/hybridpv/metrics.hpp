#pragma once

#include <vector>

namespace hpv::metrics {

inline constexpr double kHistogramBinWidth = 25.0e3;  ///< [W]

/// Fixed-width histogram of signed tracking errors. Bin k covers
/// [lower + k*width, lower + (k+1)*width).
struct Histogram {
    double lower = 0.0;
    double width = kHistogramBinWidth;
    std::vector<long> counts;

    /// Bin index for error e (bins are anchored at 0, so 0 W starts a bin).
    static long bin_of(double e, double width = kHistogramBinWidth);
};

struct Metrics {
    double rmse = 0.0;                  ///< [W]
    double mean_abs_error = 0.0;        ///< [W]
    double reserve_satisfaction = 1.0;  ///< fraction of steps with P_res >= target - tol
    Histogram histogram;
    std::size_t samples = 0;
    double energy_out_wh = 0.0;
    double energy_ref_wh = 0.0;
    double energy_pv_wh = 0.0;
    double energy_bess_wh = 0.0;
};

/// Plain series view; all vectors of equal, nonzero length.
struct TrackingSeries {
    std::vector<double> p_out;
    std::vector<double> p_ref;
    std::vector<double> p_res;
    std::vector<double> reserve_target;
    std::vector<double> p_pv;
    std::vector<double> p_bess;
    double dt = 1.0;
};

/// Throws std::invalid_argument for an empty or ragged series.
Metrics compute_metrics(const TrackingSeries& s, double tolerance_w = 1000.0);

/// RMSE of a - b.
double rmse(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hpv::metrics
