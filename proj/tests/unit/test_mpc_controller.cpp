#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hybridpv/mpc_controller.hpp"

namespace {

using namespace hpv;
using mpc::MpcConfig;

MpcConfig small_config() {
    MpcConfig c;
    c.p = 40;
    c.m = 5;
    return c;
}

mpc::ReferencePreview flat_refs(int p, double setpoint, double pmp) {
    return mpc::reference_builder(std::vector<double>(p, setpoint), 0.0, 0.9, scenario::ReservePolicy{},
                                  std::vector<double>(p, pmp));
}

TEST(MpcConfig, DefaultsValidateAndBadOnesThrow) {
    MpcConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.num_variables(), 41);
    EXPECT_EQ(c.num_rows(), 4000);
    c.m = c.p + 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = MpcConfig{};
    c.rho_eps = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ReferenceBuilder, HoldsRegulationAndAppliesReservePolicy) {
    const scenario::ReservePolicy pol{500e3, 500e3};
    const auto r = mpc::reference_builder({1e6, 1.2e6, 1.4e6}, 250e3, 0.8, pol, {1, 2, 3});
    EXPECT_EQ(r.p_out_ref[1], 1.45e6);
    EXPECT_EQ(r.soc_ref[2], 0.8);
    EXPECT_EQ(r.reserve_min[0], 250e3);
    EXPECT_NO_THROW(r.validate(3));
    EXPECT_THROW(r.validate(4), std::invalid_argument);
    EXPECT_THROW(mpc::reference_builder({1.0}, 0.0, 0.9, pol, {1.0, 2.0}), std::invalid_argument);
}

// Independent prediction: step the discrete model move by move, holding the
// last move past the control horizon.
TEST(BuildQp, PredictionMatchesDirectSimulation) {
    const auto cfg = small_config();
    const plant::PlantParameters pp;
    const plant::PlantState x0{0.7, 1.0, -0.5, 120.0, 6e5};
    const auto refs = flat_refs(cfg.p, 1.0e6, 9e5);
    const auto lm = plant::linearize(x0, refs.p_mp[0], pp, cfg.t_mpc);
    const auto build = mpc::build_qp(lm, x0, {0.0, 0.0}, refs, cfg);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(cfg.num_variables());
    for (int v = 0; v < 2 * cfg.m; ++v) z(v) = u(rng);
    const Eigen::MatrixXd pred = mpc::predicted_outputs(build, z, cfg.p);

    plant::StateVector x = x0.vector();
    for (int i = 0; i < cfg.p; ++i) {
        const int k = std::min(i, cfg.m - 1);
        const Eigen::Vector2d move(z(2 * k) * cfg.s_du[0], z(2 * k + 1) * cfg.s_du[1]);
        x = lm.discrete.ad * x + lm.discrete.bd.leftCols(2) * move;
        const plant::OutputVector y = lm.output.c * x + lm.output.d.col(2) * refs.p_mp[i] + lm.output.offset;
        for (int j = 0; j < plant::kNumOutputs; ++j) {
            EXPECT_NEAR(pred(i, j), y(j), 1e-6 * std::max(1.0, std::abs(y(j)))) << "step " << i << " output " << j;
        }
    }
}

TEST(BuildQp, ShapesAndBounds) {
    const auto cfg = small_config();
    const plant::PlantParameters pp;
    const plant::PlantState x0{0.7, 0, 0, 0, 5e5};
    const auto refs = flat_refs(cfg.p, 1e6, 1e6);
    const auto build = mpc::build_qp(plant::linearize(x0, 1e6, pp, cfg.t_mpc), x0, {0, 0}, refs, cfg);
    const auto& q = build.problem;
    EXPECT_EQ(q.num_variables(), cfg.num_variables());
    EXPECT_EQ(q.num_general(), cfg.num_rows());
    EXPECT_NO_THROW(q.validate());
    EXPECT_DOUBLE_EQ(q.upper(0) * cfg.s_du[0], 130.0);
    EXPECT_DOUBLE_EQ(q.lower(1) * cfg.s_du[1], -400e3);
    EXPECT_EQ(q.lower(2 * cfg.m), 0.0);
    EXPECT_FALSE(std::isfinite(q.upper(2 * cfg.m)));
    // Reserve row relaxed with the ECR gain of y4.
    EXPECT_EQ(q.a(MpcConfig::row_index(3, 3, 1), 2 * cfg.m), -cfg.ecr_min[3]);
}

TEST(Controller, EquilibriumNeedsNoMove) {
    const auto cfg = small_config();
    const plant::PlantParameters pp;
    const plant::PlantState x{0.9, 0.0, 0.0, 0.0, 8e5};
    const double p_out = plant::output_map(x, 1.5e6, pp).p_out;
    mpc::Controller ctl(cfg, pp);
    const auto mv = ctl.solve_step(x, flat_refs(cfg.p, p_out, 1.5e6));
    EXPECT_FALSE(mv.fault);
    EXPECT_EQ(mv.status, qp::QpStatus::optimal);
    EXPECT_NEAR(mv.u1, 0.0, 1e-3);
    EXPECT_NEAR(mv.u2, 0.0, 1.0);
    EXPECT_NEAR(mv.eps, 0.0, 1e-9);
}

TEST(Controller, LargeStepSaturatesButRespectsHardBounds) {
    const auto cfg = small_config();
    const plant::PlantParameters pp;
    mpc::Controller ctl(cfg, pp);
    plant::PlantState x{0.9, 0.0, 0.0, 0.0, 1e5};
    for (int k = 0; k < 5; ++k) {
        const auto mv = ctl.solve_step(x, flat_refs(cfg.p, 1.9e6, 1.9e6));
        ASSERT_FALSE(mv.fault);
        EXPECT_LE(std::abs(mv.u1), 130.0 + 1e-9);
        EXPECT_LE(std::abs(mv.u2), 400e3 + 1e-6);
        EXPECT_GT(mv.u2, 0.0);
        EXPECT_LT(mv.kkt_residual, 1e-8);
        x.p_pv += mv.u2 * cfg.t_mpc;
        x.i_b += mv.u1 * cfg.t_mpc;
    }
}

TEST(Controller, WarmStartedSolveMatchesColdSolveOfSameQp) {
    const auto cfg = small_config();
    const plant::PlantParameters pp;
    plant::PlantState x{0.8, 0.0, 0.0, 50.0, 7e5};
    mpc::Controller ctl(cfg, pp);
    for (int k = 0; k < 4; ++k) {
        const auto mv = ctl.solve_step(x, flat_refs(cfg.p, 1.2e6 + 1e5 * k, 1.1e6));
        ASSERT_FALSE(mv.fault);
        const auto cold = qp::solve_qp(ctl.last_build().problem);
        ASSERT_EQ(cold.status, qp::QpStatus::optimal);
        EXPECT_NEAR(mv.u1, cold.z(0) * cfg.s_du[0], 1e-6);
        EXPECT_NEAR(mv.u2, cold.z(1) * cfg.s_du[1], 1e-3);
        x.i_b += mv.u1 * cfg.t_mpc;
        x.p_pv += mv.u2 * cfg.t_mpc;
    }
}

}  // namespace
