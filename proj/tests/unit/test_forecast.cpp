#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hybridpv/forecast.hpp"

namespace {

using namespace hpv::forecast;

double monte_carlo_std(const ForecastConfig& cfg, std::uint64_t seed, int seconds) {
    ForecastContext ctx(seed);
    double sq = 0.0;
    for (int k = 0; k < seconds; ++k) {
        advance_error(ctx, 1.0, cfg);
        sq += ctx.e * ctx.e;
    }
    return std::sqrt(sq / seconds);
}

TEST(Forecast, CompensatedStdHitsTarget) {
    const ForecastConfig cfg;
    // ~16000 independent resample blocks; 3 % is several standard errors.
    EXPECT_NEAR(monte_carlo_std(cfg, 11, 3'000'000) / cfg.sigma60, 1.0, 0.03);
}

TEST(Forecast, UncompensatedFilterShrinksStd) {
    ForecastConfig cfg;
    cfg.compensate_filter = false;
    EXPECT_EQ(raw_sigma(cfg), cfg.sigma60);
    const double ratio = monte_carlo_std(cfg, 11, 1'000'000) / cfg.sigma60;
    EXPECT_LT(ratio, 0.9);
    cfg.compensate_filter = true;
    EXPECT_NEAR(ratio * raw_sigma(cfg) / cfg.sigma60, 1.0, 0.04);
}

TEST(Forecast, TaperEndpoints) {
    const ForecastConfig cfg;
    EXPECT_EQ(taper(0.0, cfg), cfg.taper_floor);
    EXPECT_EQ(taper(3.0, cfg), cfg.taper_floor);
    EXPECT_EQ(taper(60.0, cfg), 1.0);
    EXPECT_EQ(taper(600.0, cfg), 1.0);
    EXPECT_NEAR(taper(31.5, cfg), 0.5 * (1.0 + cfg.taper_floor), 1e-12);
}

TEST(Forecast, NowcastAppliesTaperedError) {
    const ForecastConfig cfg;
    const std::vector<double> truth(30, 1.0e6);
    const auto prev = nowcast_preview(truth, 0.1, 3.0, cfg);
    ASSERT_EQ(prev.size(), truth.size());
    EXPECT_NEAR(prev[0], 1.0e6 * (1.0 + 0.1 * taper(3.0, cfg)), 1e-6);
    EXPECT_NEAR(prev[29], 1.1e6, 1e-6);
}

TEST(Forecast, BlockForecast) {
    EXPECT_DOUBLE_EQ(block_forecast(1000.0, -0.1), 900.0);
    EXPECT_EQ(block_forecast(0.0, 0.3), 0.0);
    EXPECT_THROW(block_forecast(-1.0, 0.0), std::invalid_argument);
    ForecastConfig cfg;
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) EXPECT_LE(std::abs(draw_block_error(rng, cfg)), cfg.block_error);
}

TEST(Forecast, RejectsBadInput) {
    ForecastContext ctx(1);
    const ForecastConfig cfg;
    EXPECT_THROW(advance_error(ctx, 0.0, cfg), std::invalid_argument);
    ForecastConfig bad;
    bad.sigma60 = -0.1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
