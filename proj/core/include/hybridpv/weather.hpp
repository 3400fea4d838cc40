#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hpv::weather {

/// 1-s irradiance and cell-temperature series.
struct WeatherSeries {
    double t0 = 0.0;                  ///< [s since midnight]
    std::vector<double> irradiance;   ///< [W/m^2]
    std::vector<double> temperature;  ///< cell temperature [C]

    std::size_t size() const { return irradiance.size(); }
    double t_end() const { return t0 + static_cast<double>(size()) - 1.0; }
    /// Index of time t (clamped to the series).
    std::size_t index(double t) const;
};

/// Reads `t_seconds,irradiance_wm2,temperature_c`. Enforces 1-s cadence,
/// increasing time and non-negative irradiance. Throws DataError; a missing
/// column is named in the message.
WeatherSeries load_weather_csv(const std::filesystem::path& path);
void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& w);

enum class SyntheticKind { clear, intermittent, constant };

/// Clear-sky bell times a two-state cloud process. Not measured data.
struct SyntheticDayConfig {
    SyntheticKind kind = SyntheticKind::intermittent;
    double t_start = 0.0;
    double t_end = 24.0 * 3600.0;
    double sunrise = 6.0 * 3600.0;
    double sunset = 20.0 * 3600.0;
    double peak_irradiance = 1000.0;
    double clear_mean_dwell = 240.0;   ///< [s]
    double cloudy_mean_dwell = 150.0;  ///< [s]
    double cloudy_k_min = 0.2;
    double cloudy_k_max = 0.5;
    double edge_min = 20.0;  ///< cloud-edge ramp duration bounds [s]
    double edge_max = 60.0;
    double ambient_min = 12.0;
    double ambient_max = 24.0;
    double heating_coeff = 0.03;  ///< cell temperature rise per W/m^2
    double constant_irradiance = 1000.0;
    double constant_temperature = 25.0;

    void validate() const;
};

WeatherSeries synthetic_day(const SyntheticDayConfig& cfg, std::uint64_t seed);

}  // namespace hpv::weather
