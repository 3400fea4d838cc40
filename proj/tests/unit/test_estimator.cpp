#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "hybridpv/estimator.hpp"

namespace {

using namespace hpv;
using namespace hpv::estimator;

TEST(Estimator, PerturbAllScalesEveryParameter) {
    const auto p = battery::reference_pack();
    const auto q = perturb_all(p, 0.05);
    EXPECT_NEAR(q.r_s, 1.05 * p.r_s, 1e-15);
    EXPECT_NEAR(q.r_tl, 1.05 * p.r_tl, 1e-15);
    EXPECT_NEAR(q.c_ts, 1.05 * p.c_ts, 1e-9);
    EXPECT_NEAR(q.capacity_ah, 1.05 * p.capacity_ah, 1e-12);
    EXPECT_EQ(q.voc_cell, p.voc_cell);
    EXPECT_EQ(q.n_series, p.n_series);
}

TEST(Estimator, UpdateShrinksCovariance) {
    const auto pack = battery::reference_pack();
    const auto e0 = ekf_init({0.6, 0.0, 0.0}, pack, EkfConfig{});
    const double v = battery::terminal_voltage({0.65, 0.0, 0.0}, 100.0, pack);
    const auto e1 = ekf_update(ekf_predict(e0, 100.0, 1.0), v, 100.0);
    EXPECT_LT(e1.cov(0, 0), e0.cov(0, 0));
    EXPECT_LT((e1.cov - e1.cov.transpose()).norm(), 1e-15);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(e1.cov).eigenvalues().minCoeff(), 0.0);
    // Measured voltage above the prediction pulls SOC upward.
    EXPECT_GT(e1.mean(0), 0.6);
}

TEST(Estimator, PredictMatchesBatteryStep) {
    const auto pack = battery::reference_pack();
    auto e = ekf_init({0.7, 1.0, 2.0}, pack, EkfConfig{});
    e = ekf_predict(e, 200.0, 1.0);
    e = ekf_predict(e, 200.0, 5.0);
    const auto ref = battery::step_battery(battery::step_battery({0.7, 1.0, 2.0}, 200.0, 1.0, pack).state, 200.0,
                                           5.0, pack).state;
    EXPECT_NEAR(e.mean(0), ref.soc, 1e-14);
    EXPECT_NEAR(e.mean(1), ref.v_cts, 1e-10);
    EXPECT_THROW(ekf_predict(e, 0.0, 0.0), std::invalid_argument);
}

TEST(Estimator, ConvergesFromWrongGuessWithoutNoise) {
    const auto pack = battery::reference_pack();
    const CyclingProfile prof;
    battery::BatteryState truth{prof.soc0, 0.0, 0.0};
    auto e = ekf_init({prof.soc0 + 0.05, 0.0, 0.0}, pack, EkfConfig{});
    double worst_late = 0.0;
    for (double t = 0.0; t < 1200.0; t += 1.0) {
        const double i = prof.current_at(t);
        truth = battery::step_battery(truth, i, 1.0, pack).state;
        e = ekf_update(ekf_predict(e, i, 1.0), battery::terminal_voltage(truth, i, pack), i);
        if (t >= 300.0) worst_late = std::max(worst_late, std::abs(e.mean(0) - truth.soc));
    }
    EXPECT_LT(worst_late, 0.005);
}

TEST(Estimator, ReportClampsSoc) {
    EkfState e;
    e.mean(0) = 1.02;
    EXPECT_EQ(e.soc_report(), 1.0);
    e.mean(0) = -0.1;
    EXPECT_EQ(e.soc_report(), 0.0);
}

TEST(Estimator, CyclingProfileShape) {
    const CyclingProfile p;
    EXPECT_EQ(p.current_at(0.0), p.discharge_current);
    EXPECT_EQ(p.current_at(p.discharge_s + 1.0), 0.0);
    EXPECT_EQ(p.current_at(p.discharge_s + p.rest_s + 1.0), p.charge_current);
    EXPECT_EQ(p.current_at(p.duration()), 0.0);
    EXPECT_NEAR(p.duration(), p.cycles * (p.discharge_s + p.charge_s + 2 * p.rest_s), 1e-9);
}

TEST(Estimator, SensitivityRunIsDeterministicInSeed) {
    CyclingProfile prof;
    prof.cycles = 1;
    const auto pack = battery::reference_pack();
    const auto a = sensitivity_run(pack, 0.05, prof, SensorNoise{}, EkfConfig{}, 3);
    const auto b = sensitivity_run(pack, 0.05, prof, SensorNoise{}, EkfConfig{}, 3);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    EXPECT_EQ(a.rows.back().soc_base, b.rows.back().soc_base);
    EXPECT_EQ(a.base.rmse, b.base.rmse);
    EXPECT_LT(a.base.rmse, a.plus.rmse);
}

}  // namespace
