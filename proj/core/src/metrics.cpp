#include "hybridpv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpv::metrics {

long Histogram::bin_of(double e, double width) { return static_cast<long>(std::floor(e / width)); }

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("rmse: series must be nonempty and of equal length");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(a.size()));
}

Metrics compute_metrics(const TrackingSeries& s, double tolerance_w) {
    const std::size_t n = s.p_out.size();
    if (n == 0) {
        throw std::invalid_argument("compute_metrics: empty log");
    }
    auto same = [n](const std::vector<double>& v) { return v.size() == n; };
    if (!same(s.p_ref) || !same(s.p_res) || !same(s.reserve_target) || !same(s.p_pv) || !same(s.p_bess)) {
        throw std::invalid_argument("compute_metrics: series lengths differ");
    }

    Metrics m;
    m.samples = n;
    m.rmse = rmse(s.p_out, s.p_ref);

    long lo = 0;
    long hi = 0;
    std::size_t ok = 0;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = s.p_out[i] - s.p_ref[i];
        abs_sum += std::abs(e);
        const long b = Histogram::bin_of(e);
        if (i == 0) {
            lo = hi = b;
        }
        lo = std::min(lo, b);
        hi = std::max(hi, b);
        if (s.p_res[i] >= s.reserve_target[i] - tolerance_w) {
            ++ok;
        }
        m.energy_out_wh += s.p_out[i] * s.dt / 3600.0;
        m.energy_ref_wh += s.p_ref[i] * s.dt / 3600.0;
        m.energy_pv_wh += s.p_pv[i] * s.dt / 3600.0;
        m.energy_bess_wh += s.p_bess[i] * s.dt / 3600.0;
    }
    m.mean_abs_error = abs_sum / static_cast<double>(n);
    m.reserve_satisfaction = static_cast<double>(ok) / static_cast<double>(n);

    m.histogram.lower = static_cast<double>(lo) * kHistogramBinWidth;
    m.histogram.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++m.histogram.counts[static_cast<std::size_t>(Histogram::bin_of(s.p_out[i] - s.p_ref[i]) - lo)];
    }
    return m;
}

}  // namespace hpv::metrics
