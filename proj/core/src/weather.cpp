#include "hybridpv/weather.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <stdexcept>

#include "csv_util.hpp"
#include "hybridpv/errors.hpp"

namespace hpv::weather {

std::size_t WeatherSeries::index(double t) const {
    if (irradiance.empty()) {
        throw std::out_of_range("WeatherSeries: empty series");
    }
    const double k = std::round(t - t0);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(size() - 1)));
}

WeatherSeries load_weather_csv(const std::filesystem::path& path) {
    const auto table = detail::read_numeric_csv(path);
    const auto& t = table.columns[table.column("t_seconds")];
    const auto& g = table.columns[table.column("irradiance_wm2")];
    const auto& temp = table.columns[table.column("temperature_c")];
    if (table.rows < 2) {
        throw DataError(path.string() + ": need at least two rows");
    }
    for (std::size_t i = 0; i < table.rows; ++i) {
        if (i > 0) {
            const double dt = t[i] - t[i - 1];
            if (!(dt > 0.0)) {
                throw DataError(path.string() + ": time is not increasing at row " + std::to_string(i + 2));
            }
            if (std::abs(dt - 1.0) > 1e-6) {
                throw DataError(path.string() + ": gap of " + std::to_string(dt) + " s at row " +
                                std::to_string(i + 2) + " (1-s cadence required)");
            }
        }
        if (!(g[i] >= 0.0)) {
            throw DataError(path.string() + ": negative irradiance at row " + std::to_string(i + 2));
        }
    }
    WeatherSeries w;
    w.t0 = t.front();
    w.irradiance = g;
    w.temperature = temp;
    return w;
}

void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& w) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "t_seconds,irradiance_wm2,temperature_c\n" << std::setprecision(12);
    for (std::size_t i = 0; i < w.size(); ++i) {
        out << w.t0 + static_cast<double>(i) << ',' << w.irradiance[i] << ',' << w.temperature[i] << '\n';
    }
}

void SyntheticDayConfig::validate() const {
    if (!(t_end > t_start && sunset > sunrise && peak_irradiance >= 0.0)) {
        throw ConfigError("synthetic day: need t_end > t_start, sunset > sunrise, peak >= 0");
    }
    if (!(clear_mean_dwell > 0.0 && cloudy_mean_dwell > 0.0 && cloudy_k_min >= 0.0 &&
          cloudy_k_max >= cloudy_k_min && cloudy_k_max <= 1.0 && edge_min > 0.0 && edge_max >= edge_min)) {
        throw ConfigError("synthetic day: invalid cloud process parameters");
    }
}

WeatherSeries synthetic_day(const SyntheticDayConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(std::floor(cfg.t_end - cfg.t_start)) + 1;
    WeatherSeries w;
    w.t0 = cfg.t_start;
    w.irradiance.resize(n);
    w.temperature.resize(n);

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> clear_dwell(1.0 / cfg.clear_mean_dwell);
    std::exponential_distribution<double> cloudy_dwell(1.0 / cfg.cloudy_mean_dwell);
    std::uniform_real_distribution<double> cloudy_k(cfg.cloudy_k_min, cfg.cloudy_k_max);
    std::uniform_real_distribution<double> edge(cfg.edge_min, cfg.edge_max);

    // Cloud attenuation: linear ramps between targets at each switch.
    bool cloudy = false;
    double k = 1.0;
    double k_from = 1.0;
    double k_to = 1.0;
    double ramp_left = 0.0;
    double ramp_len = 1.0;
    double next_switch = clear_dwell(rng);

    for (std::size_t i = 0; i < n; ++i) {
        const double t = cfg.t_start + static_cast<double>(i);
        double g = 0.0;
        double temp = cfg.constant_temperature;
        if (cfg.kind == SyntheticKind::constant) {
            g = cfg.constant_irradiance;
        } else {
            const double phase = (t - cfg.sunrise) / (cfg.sunset - cfg.sunrise);
            const double clear_sky =
                (phase > 0.0 && phase < 1.0) ? cfg.peak_irradiance * std::pow(std::sin(std::numbers::pi * phase), 1.15)
                                             : 0.0;
            if (cfg.kind == SyntheticKind::intermittent) {
                const double elapsed = static_cast<double>(i);
                if (elapsed >= next_switch) {
                    cloudy = !cloudy;
                    k_from = k;
                    k_to = cloudy ? cloudy_k(rng) : 1.0;
                    ramp_len = edge(rng);
                    ramp_left = ramp_len;
                    next_switch = elapsed + ramp_len + (cloudy ? cloudy_dwell(rng) : clear_dwell(rng));
                }
                if (ramp_left > 0.0) {
                    ramp_left = std::max(0.0, ramp_left - 1.0);
                    k = k_to + (k_from - k_to) * (ramp_left / ramp_len);
                }
            }
            g = clear_sky * k;
            const double mid = 0.5 * (cfg.ambient_min + cfg.ambient_max);
            const double amp = 0.5 * (cfg.ambient_max - cfg.ambient_min);
            // Coldest around 03:00, warmest around 15:00.
            const double ambient = mid + amp * std::sin(2.0 * std::numbers::pi * (t - 9.0 * 3600.0) / 86400.0);
            temp = ambient + cfg.heating_coeff * g;
        }
        w.irradiance[i] = g;
        w.temperature[i] = temp;
    }
    return w;
}

}  // namespace hpv::weather
