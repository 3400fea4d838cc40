#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "hybridpv/metrics.hpp"

namespace {

using namespace hpv::metrics;

TrackingSeries constant_series(std::size_t n, double out, double ref) {
    TrackingSeries s;
    s.p_out.assign(n, out);
    s.p_ref.assign(n, ref);
    s.p_res.assign(n, 600e3);
    s.reserve_target.assign(n, 500e3);
    s.p_pv.assign(n, out);
    s.p_bess.assign(n, 0.0);
    return s;
}

TEST(Metrics, ConstantErrorGivesThatRmse) {
    const auto m = compute_metrics(constant_series(3600, 1.01e6, 1.0e6));
    EXPECT_NEAR(m.rmse, 10e3, 1e-6);
    EXPECT_NEAR(m.mean_abs_error, 10e3, 1e-6);
    EXPECT_EQ(m.samples, 3600u);
    EXPECT_NEAR(m.energy_out_wh, 1.01e6, 1e-3);
    EXPECT_NEAR(m.energy_ref_wh, 1.0e6, 1e-3);
    EXPECT_EQ(m.reserve_satisfaction, 1.0);
}

TEST(Metrics, HistogramBinsAnchoredAtZero) {
    EXPECT_EQ(Histogram::bin_of(0.0), 0);
    EXPECT_EQ(Histogram::bin_of(24999.0), 0);
    EXPECT_EQ(Histogram::bin_of(25000.0), 1);
    EXPECT_EQ(Histogram::bin_of(-1.0), -1);
    const auto m = compute_metrics(constant_series(10, 1.01e6, 1.0e6));
    long total = 0;
    for (long c : m.histogram.counts) total += c;
    EXPECT_EQ(total, 10);
    const long k = Histogram::bin_of(10e3) - static_cast<long>(m.histogram.lower / m.histogram.width);
    EXPECT_EQ(m.histogram.counts.at(static_cast<std::size_t>(k)), 10);
}

TEST(Metrics, ReserveToleranceIsInclusive) {
    auto s = constant_series(4, 1e6, 1e6);
    s.p_res = {500e3, 499.5e3, 499e3, 498e3};
    EXPECT_DOUBLE_EQ(compute_metrics(s, 1000.0).reserve_satisfaction, 0.75);
    EXPECT_DOUBLE_EQ(compute_metrics(s, 0.0).reserve_satisfaction, 0.25);
}

TEST(Metrics, RejectsEmptyOrRagged) {
    EXPECT_THROW(compute_metrics(TrackingSeries{}), std::invalid_argument);
    auto s = constant_series(5, 1, 1);
    s.p_res.pop_back();
    EXPECT_THROW(compute_metrics(s), std::invalid_argument);
    EXPECT_THROW(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Metrics, RmseHelper) {
    EXPECT_DOUBLE_EQ(rmse({3.0, -4.0}, {0.0, 0.0}), std::sqrt(12.5));
}

}  // namespace
