#include <gtest/gtest.h>

#include <cmath>

#include "hybridpv/errors.hpp"
#include "hybridpv/results_io.hpp"
#include "hybridpv/sim_engine.hpp"

namespace {

using namespace hpv;

// Ten minutes around noon with regulation active from the first step.
sim::RunConfig short_run() {
    sim::RunConfig c;
    c.t_start = 12.0 * 3600.0;
    c.t_end = c.t_start + 600.0;
    c.regulation_activation = c.t_start;
    c.seed = 3;
    c.case_label = "unit";
    return c;
}

class SimEngine : public ::testing::Test {
protected:
    static void SetUpTestSuite() { log_ = new sim::ResultLog(sim::run_simulation(short_run())); }
    static void TearDownTestSuite() {
        delete log_;
        log_ = nullptr;
    }
    static sim::ResultLog* log_;
};

sim::ResultLog* SimEngine::log_ = nullptr;

TEST_F(SimEngine, OneRecordPerSecondAndCleanSolves) {
    EXPECT_EQ(log_->records.size(), 601u);
    EXPECT_EQ(log_->meta.mpc_solves, 201);
    EXPECT_EQ(log_->meta.mpc_faults, 0);
    EXPECT_LT(log_->meta.max_kkt, 1e-8);
}

TEST_F(SimEngine, ReplayReproducesStates) {
    EXPECT_LE(sim::replay_max_mismatch(*log_, plant::PlantParameters{}), 1e-9);
}

TEST_F(SimEngine, PvNeverExceedsAvailablePower) {
    for (const auto& r : log_->records) {
        EXPECT_LE(r.x.p_pv, r.p_mp + 1.0) << "t = " << r.t;
        EXPECT_LE(std::abs(r.u1), 130.0 + 1e-9);
        EXPECT_LE(std::abs(r.u2), 400e3 + 1e-6);
    }
}

// Chemical energy drawn from the cells equals the integral of Voc * Ib.
TEST_F(SimEngine, BatteryEnergyBookkeeping) {
    const auto pack = plant::PlantParameters{}.pack;
    const auto& recs = log_->records;
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
        const double i_mid = 0.5 * (recs[k].x.i_b + recs[k + 1].x.i_b);
        integral += battery::pack_voc(recs[k].soc_true, pack) * i_mid * log_->dt;
    }
    const double chem = pack.n_series * pack.capacity_coulomb() *
                        (battery::voc_integral(recs.front().soc_true, pack.voc_cell) -
                         battery::voc_integral(recs.back().soc_true, pack.voc_cell));
    ASSERT_GT(std::abs(chem), 1e6) << "battery barely used; test is vacuous";
    EXPECT_NEAR(integral / chem, 1.0, 0.02);
}

TEST_F(SimEngine, ResultsCsvRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "hybridpv_sim_rt.csv";
    io::write_results_csv(path, *log_);
    const auto back = io::read_results_csv(path);
    ASSERT_EQ(back.records.size(), log_->records.size());
    for (std::size_t k = 0; k < back.records.size(); k += 37) {
        EXPECT_NEAR(back.records[k].p_out, log_->records[k].p_out, 1e-6);
        EXPECT_NEAR(back.records[k].soc_est, log_->records[k].soc_est, 1e-12);
        EXPECT_EQ(back.records[k].status, log_->records[k].status);
    }
    const auto m1 = metrics::compute_metrics(log_->tracking());
    const auto m2 = metrics::compute_metrics(back.tracking());
    EXPECT_NEAR(m1.rmse, m2.rmse, 1e-6);
}

TEST(SimEngineConfig, RequestScaleScalesBaselineOnly) {
    auto a = short_run();
    a.t_end = a.t_start + 30.0;
    auto b = a;
    b.request_scale = 0.75;
    const auto inputs = sim::prepare_inputs(a);
    const auto la = sim::run_simulation(a, inputs);
    const auto lb = sim::run_simulation(b, inputs);
    const auto& ra = la.records.back();
    const auto& rb = lb.records.back();
    EXPECT_NEAR(rb.p_ref - rb.reg, 0.75 * (ra.p_ref - ra.reg), 1e-6);
    EXPECT_EQ(ra.reg, rb.reg);
}

TEST(SimEngineConfig, InvalidRunsAreRejected) {
    auto c = short_run();
    c.t_end = c.t_start;
    EXPECT_THROW(c.validate(), ConfigError);
    c = short_run();
    c.dt_sim = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = short_run();
    c.weather_csv = "/nonexistent/weather.csv";
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SimEngineConfig, LeavingTheValidBandAborts) {
    auto c = short_run();
    c.soc_initial = 0.17;
    c.t_end = c.t_start + 10.0;
    EXPECT_THROW(sim::run_simulation(c), ModelValidityError);
}

}  // namespace
