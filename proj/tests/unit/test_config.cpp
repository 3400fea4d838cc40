#include <gtest/gtest.h>

#include <fstream>

#include "hybridpv/config.hpp"
#include "hybridpv/errors.hpp"

namespace {

using hpv::ConfigError;
using hpv::config::load_run_config;
using hpv::config::parse_run_config;

std::string error_of(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

TEST(Config, EmptyTextGivesDefaults) {
    const auto c = parse_run_config("");
    const hpv::sim::RunConfig d;
    EXPECT_EQ(c.seed, d.seed);
    EXPECT_EQ(c.mpc.p, d.mpc.p);
    EXPECT_EQ(c.ekf.r, d.ekf.r);
    EXPECT_EQ(c.plant.pack.capacity_ah, d.plant.pack.capacity_ah);
}

TEST(Config, ParsesEverySectionKind) {
    const auto c = parse_run_config(R"(
[run]
seed = 42
request_scale = 0.75
regulation_enabled = no
case_label = case2
[scenario]
soc_target = 0.8
reserve_base_w = 400000
[mpc]
p = 100
m = 10
w_y = 3, 0, 0.2, 0, 0
[estimator]
voltage_sigma = 2.0
[forecast]
block_kind = gaussian
[battery]
pack_capacity_ah = 180
)");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.request_scale, 0.75);
    EXPECT_FALSE(c.regulation_enabled);
    EXPECT_EQ(c.case_label, "case2");
    EXPECT_EQ(c.soc_target, 0.8);
    EXPECT_EQ(c.reserve.base, 400e3);
    EXPECT_EQ(c.mpc.p, 100);
    EXPECT_EQ(c.mpc.w_y[2], 0.2);
    EXPECT_EQ(c.noise.voltage_sigma, 2.0);
    EXPECT_EQ(c.ekf.r, 4.0);  // follows the voltage noise unless set
    EXPECT_EQ(c.forecast.block_kind, hpv::forecast::BlockErrorKind::gaussian);
    EXPECT_NEAR(c.plant.pack.capacity_ah, 180.0, 1e-9);
}

TEST(Config, UnknownKeysAndSectionsAreErrors) {
    EXPECT_EQ(error_of("[run]\nsed = 4\n"), "unknown key 'sed' in [run]");
    EXPECT_NE(error_of("[nope]\na = 1\n").find("[nope]"), std::string::npos);
}

TEST(Config, MalformedValuesAreErrors) {
    EXPECT_FALSE(error_of("[run]\nseed = many\n").empty());
    EXPECT_FALSE(error_of("[mpc]\nw_y = 1, 2\n").empty());
    EXPECT_FALSE(error_of("[run]\nregulation_enabled = maybe\n").empty());
    EXPECT_FALSE(error_of("[forecast]\nblock_kind = triangular\n").empty());
    // Parses, then fails validation.
    EXPECT_FALSE(error_of("[run]\nstart_time_s = 100\nend_time_s = 50\n").empty());
}

TEST(Config, RelativeDataPathsFollowTheConfigFile) {
    const auto dir = std::filesystem::temp_directory_path() / "hybridpv_cfg_test";
    std::filesystem::create_directories(dir / "data");
    std::ofstream(dir / "data" / "w.csv") << "t_seconds,irradiance_wm2,temperature_c\n0,0,20\n";
    std::ofstream(dir / "run.ini") << "[run]\nweather_csv = data/w.csv\nout_dir = results\n";
    const auto c = load_run_config(dir / "run.ini");
    EXPECT_EQ(std::filesystem::weakly_canonical(c.weather_csv), std::filesystem::weakly_canonical(dir / "data" / "w.csv"));
    EXPECT_EQ(c.out_dir, std::filesystem::path("results"));
    EXPECT_THROW(load_run_config(dir / "missing.ini"), ConfigError);
}

TEST(Config, ShippedDefaultMatchesBuiltIns) {
    const auto c = load_run_config(std::filesystem::path(HYBRIDPV_SOURCE_DIR) / "configs" / "default.ini");
    const hpv::sim::RunConfig d;
    EXPECT_EQ(c.mpc.s_y, d.mpc.s_y);
    EXPECT_EQ(c.mpc.ecr_max, d.mpc.ecr_max);
    EXPECT_EQ(c.plant.eta_pv, d.plant.eta_pv);
    EXPECT_EQ(c.forecast.sigma60, d.forecast.sigma60);
    EXPECT_EQ(c.thermal.offset, d.thermal.offset);
    EXPECT_NEAR(c.plant.pack.r_s, d.plant.pack.r_s, 1e-12 * d.plant.pack.r_s);
    EXPECT_NEAR(c.plant.pv.stc.i_s, d.plant.pv.stc.i_s, 1e-9 * d.plant.pv.stc.i_s);
}

}  // namespace
