#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "hybridpv/plant_model.hpp"

namespace {

using namespace hpv::plant;

TEST(Plant, ContinuousStructure) {
    const PlantParameters p;
    const auto m = build_continuous(p);
    // Only the battery branches have dynamics; Ib and Ppv are pure integrators.
    EXPECT_EQ(m.a.row(3).norm(), 0.0);
    EXPECT_EQ(m.a.row(4).norm(), 0.0);
    EXPECT_EQ(m.b(3, 0), 1.0);
    EXPECT_EQ(m.b(4, 1), 1.0);
    EXPECT_EQ(m.b.col(2).norm(), 0.0);
    EXPECT_NEAR(m.a(1, 1), -1.0 / p.pack.tau_ts(), 1e-15);
}

TEST(Plant, ZohScalarAnalytic) {
    Eigen::MatrixXd a(1, 1), b(1, 1), ad, bd;
    a << -0.7;
    b << 2.0;
    discretize_zoh(a, b, 0.5, ad, bd);
    EXPECT_NEAR(ad(0, 0), std::exp(-0.35), 1e-15);
    EXPECT_NEAR(bd(0, 0), (1.0 - std::exp(-0.35)) / 0.7 * 2.0, 1e-15);
}

TEST(Plant, ZohDoubleIntegrator) {
    Eigen::MatrixXd a(2, 2), b(2, 1), ad, bd;
    a << 0, 1, 0, 0;
    b << 0, 1;
    discretize_zoh(a, b, 3.0, ad, bd);
    EXPECT_NEAR(ad(0, 1), 3.0, 1e-14);
    EXPECT_NEAR(bd(0, 0), 4.5, 1e-14);
    EXPECT_NEAR(bd(1, 0), 3.0, 1e-14);
}

TEST(Plant, ZohRejectsBadInput) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2), b = Eigen::MatrixXd::Zero(3, 1), ad, bd;
    EXPECT_THROW(discretize_zoh(a, b, 1.0, ad, bd), std::invalid_argument);
    b = Eigen::MatrixXd::Zero(2, 1);
    EXPECT_THROW(discretize_zoh(a, b, 0.0, ad, bd), std::invalid_argument);
}

TEST(Plant, FullyControllable) {
    EXPECT_EQ(plant_controllability_rank(PlantParameters{}), kNumStates);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2), b(2, 1);
    b << 1, 0;
    EXPECT_EQ(controllability_rank(a, b), 1);
}

TEST(Plant, OutputMapPowerBalance) {
    const PlantParameters p;
    const PlantState x{0.6, 1.0, 2.0, 200.0, 900e3};
    const auto y = output_map(x, 1.2e6, p);
    EXPECT_NEAR(y.p_out, battery_ac_power(x, p) + p.eta_pv * x.p_pv, 1e-6);
    EXPECT_NEAR(y.p_res, p.eta_discharge * (p.pack.p_nominal - battery_dc_power(x, p)) + p.eta_pv * 300e3, 1e-6);
    EXPECT_EQ(eta_bess(-1.0, p), p.eta_charge);
    EXPECT_EQ(eta_bess(1.0, p), p.eta_discharge);
}

class Linearization : public ::testing::TestWithParam<double> {};

TEST_P(Linearization, JacobianMatchesFiniteDifference) {
    const PlantParameters p;
    const PlantState x{0.55, 3.0, -2.0, GetParam(), 800e3};
    const double u3 = 1.1e6;
    const auto lin = linearize_outputs(x, u3, p);
    const StateVector x0 = x.vector();
    const StateVector h = (StateVector() << 1e-6, 1e-4, 1e-4, 1e-4, 1.0).finished();
    for (int j = 0; j < kNumStates; ++j) {
        StateVector xp = x0, xm = x0;
        xp(j) += h(j);
        xm(j) -= h(j);
        const OutputVector fd = (output_map(PlantState::from_vector(xp), u3, p).vector() -
                                 output_map(PlantState::from_vector(xm), u3, p).vector()) / (2 * h(j));
        for (int i = 0; i < kNumOutputs; ++i) {
            EXPECT_NEAR(lin.c(i, j), fd(i), 1e-6 * std::max(1.0, std::abs(fd(i)))) << "dy" << i << "/dx" << j;
        }
    }
    // Affine model is exact at the linearization point.
    const Eigen::Vector3d u(0.0, 0.0, u3);
    const OutputVector y_lin = lin.c * x0 + lin.d * u + lin.offset;
    EXPECT_LT((y_lin - output_map(x, u3, p).vector()).norm(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(ChargeAndDischarge, Linearization, ::testing::Values(-300.0, 250.0));

TEST(Plant, LinearizeBundlesDiscreteModel) {
    const PlantParameters p;
    const auto lm = linearize({0.6, 0, 0, 100.0, 5e5}, 1e6, p, 3.0);
    EXPECT_EQ(lm.discrete.ts, 3.0);
    EXPECT_NEAR(lm.discrete.bd(3, 0), 3.0, 1e-12);
    EXPECT_NEAR(lm.discrete.ad(0, 3), -3.0 / p.pack.capacity_coulomb(), 1e-12);
    EXPECT_EQ(lm.eta_bess, p.eta_discharge);
}

}  // namespace
