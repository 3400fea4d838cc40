#include <gtest/gtest.h>

#include <fstream>

#include "hybridpv/errors.hpp"
#include "hybridpv/weather.hpp"

namespace {

using namespace hpv::weather;

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

std::string error_of(const std::filesystem::path& p) {
    try {
        load_weather_csv(p);
    } catch (const hpv::DataError& e) {
        return e.what();
    }
    return {};
}

TEST(WeatherCsv, RoundTrip) {
    WeatherSeries w;
    w.t0 = 36000.0;
    w.irradiance = {0.0, 512.5, 980.25};
    w.temperature = {20.0, 31.5, 44.0};
    const auto path = std::filesystem::temp_directory_path() / "hybridpv_weather_rt.csv";
    write_weather_csv(path, w);
    const auto back = load_weather_csv(path);
    EXPECT_EQ(back.t0, w.t0);
    EXPECT_EQ(back.irradiance, w.irradiance);
    EXPECT_EQ(back.temperature, w.temperature);
    EXPECT_EQ(back.t_end(), 36002.0);
    EXPECT_EQ(back.index(0.0), 0u);
    EXPECT_EQ(back.index(1e9), 2u);
}

TEST(WeatherCsv, MissingColumnIsNamed) {
    const auto p = write_tmp("hybridpv_w_missing.csv", "t_seconds,irradiance_wm2\n0,100\n1,100\n");
    EXPECT_NE(error_of(p).find("temperature_c"), std::string::npos) << error_of(p);
}

TEST(WeatherCsv, RejectsBadCadenceAndNegativeIrradiance) {
    const auto gap = write_tmp("hybridpv_w_gap.csv", "t_seconds,irradiance_wm2,temperature_c\n0,1,20\n2,1,20\n");
    EXPECT_FALSE(error_of(gap).empty());
    const auto neg = write_tmp("hybridpv_w_neg.csv", "t_seconds,irradiance_wm2,temperature_c\n0,1,20\n1,-5,20\n");
    EXPECT_FALSE(error_of(neg).empty());
    const auto text = write_tmp("hybridpv_w_text.csv", "t_seconds,irradiance_wm2,temperature_c\n0,abc,20\n");
    EXPECT_FALSE(error_of(text).empty());
    EXPECT_THROW(load_weather_csv("/nonexistent/weather.csv"), hpv::DataError);
}

TEST(SyntheticDay, ClearDayShape) {
    SyntheticDayConfig c;
    c.kind = SyntheticKind::clear;
    const auto w = synthetic_day(c, 1);
    ASSERT_EQ(w.size(), 86401u);
    EXPECT_EQ(w.irradiance[w.index(3 * 3600.0)], 0.0);
    EXPECT_EQ(w.irradiance[w.index(22 * 3600.0)], 0.0);
    const double noon = w.irradiance[w.index(13 * 3600.0)];
    EXPECT_NEAR(noon, c.peak_irradiance, 1.0);
    for (double g : w.irradiance) EXPECT_LE(g, c.peak_irradiance + 1e-9);
}

TEST(SyntheticDay, CloudsOnlyDimAndAreSeeded) {
    SyntheticDayConfig c;
    c.t_start = 9 * 3600.0;
    c.t_end = 15 * 3600.0;
    auto clear_cfg = c;
    clear_cfg.kind = SyntheticKind::clear;
    const auto clear = synthetic_day(clear_cfg, 1);
    const auto a = synthetic_day(c, 4);
    const auto b = synthetic_day(c, 4);
    EXPECT_EQ(a.irradiance, b.irradiance);
    EXPECT_NE(synthetic_day(c, 5).irradiance, a.irradiance);
    int dimmed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE(a.irradiance[i], clear.irradiance[i] + 1e-9);
        dimmed += a.irradiance[i] < 0.6 * clear.irradiance[i];
    }
    EXPECT_GT(dimmed, 0);
}

TEST(SyntheticDay, ValidationUsesConfigError) {
    SyntheticDayConfig c;
    c.sunset = c.sunrise - 1.0;
    EXPECT_THROW(c.validate(), hpv::ConfigError);
}

}  // namespace
