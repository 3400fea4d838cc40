#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hybridpv/errors.hpp"
#include "hybridpv/scenario.hpp"

namespace {

using namespace hpv::scenario;

TEST(Regulation, SampleAndHoldAfterActivation) {
    RegulationSignal r;
    r.t0 = 0.0;
    r.period = 2.0;
    r.samples = {10.0, 20.0, 30.0};
    r.activation = 2.0;
    EXPECT_EQ(r.value_at(1.0), 0.0);
    EXPECT_EQ(r.value_at(2.0), 20.0);
    EXPECT_EQ(r.value_at(3.9), 20.0);
    EXPECT_EQ(r.value_at(100.0), 30.0);
}

TEST(Regulation, SetpointCombinesScaledBaseline) {
    BaselineSchedule b{0.0, 1800.0, {1.0e6, 1.5e6}};
    RegulationSignal r;
    r.samples = {1e5};
    r.activation = 0.0;
    EXPECT_EQ(b.at(1799.0), 1.0e6);
    EXPECT_EQ(b.at(1800.0), 1.5e6);
    EXPECT_DOUBLE_EQ(setpoint_at(2000.0, b, r, 0.75), 0.75 * 1.5e6 + 1e5);
}

TEST(Reserve, TargetPolicy) {
    const ReservePolicy pol{500e3, 500e3};
    EXPECT_EQ(reserve_target(0.0, pol), 500e3);
    EXPECT_EQ(reserve_target(-300e3, pol), 500e3);
    EXPECT_EQ(reserve_target(250e3, pol), 250e3);
    EXPECT_EQ(reserve_target(600e3, pol), 0.0);
    EXPECT_THROW((ReservePolicy{500e3, 0.0}.validate()), std::invalid_argument);
}

TEST(Regulation, SynthesizedTraceIsBoundedAndDeterministic) {
    RegdSynthParams p;
    p.duration = 4 * 3600.0;
    const auto a = synth_regd(p, 5);
    const auto b = synth_regd(p, 5);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.samples.size(), 7201u);  // both endpoints
    double peak = 0.0;
    for (double s : a.samples) peak = std::max(peak, std::abs(s));
    EXPECT_LE(peak, p.capacity / 2 + 1e-6);
    EXPECT_GT(peak, 0.1 * p.capacity);
    const double mean = std::accumulate(a.samples.begin(), a.samples.end(), 0.0) / a.samples.size();
    EXPECT_LE(std::abs(mean), 1e-4 * p.capacity);
    EXPECT_NE(synth_regd(p, 6).samples, a.samples);
}

TEST(Regulation, CsvRoundTrip) {
    RegdSynthParams p;
    p.duration = 600.0;
    const auto reg = synth_regd(p, 1);
    const auto path = std::filesystem::temp_directory_path() / "hybridpv_reg_roundtrip.csv";
    write_regulation_csv(path, reg);
    const auto back = load_regulation_csv(path, reg.capacity, reg.activation);
    ASSERT_EQ(back.samples.size(), reg.samples.size());
    for (std::size_t i = 0; i < reg.samples.size(); ++i) EXPECT_NEAR(back.samples[i], reg.samples[i], 1e-6);
    std::filesystem::remove(path);
    EXPECT_THROW(load_regulation_csv(path, 1e6, 0.0), hpv::DataError);
}

TEST(Thermal, SteadyStateHolds) {
    const ThermalParams tp;
    auto s = thermal_init(1.2e6, tp);
    EXPECT_NEAR(s.output, 1.2e6 + tp.offset, 1e-6);
    for (int k = 0; k < 100; ++k) s = thermal_step(s, 1.2e6, 1.0, tp);
    EXPECT_NEAR(s.output, 1.2e6 + tp.offset, 1e-6);
}

TEST(Thermal, RampLimitedStepResponse) {
    const ThermalParams tp;
    auto s = thermal_init(0.0, tp);
    std::vector<double> out;
    for (int k = 0; k < 600; ++k) {
        s = thermal_step(s, 2.0e6, 1.0, tp);
        out.push_back(s.output);
    }
    for (std::size_t k = 60; k < out.size(); ++k) EXPECT_LE(out[k] - out[k - 60], tp.ramp_limit + 1e-6);
    EXPECT_NEAR(out.back(), 2.0e6 + tp.offset, 1e3);
    EXPECT_THROW(thermal_step(s, 0.0, 2.0, tp), std::invalid_argument);
}

}  // namespace
