#include "hybridpv/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpv::forecast {

void ForecastConfig::validate() const {
    if (!(sigma60 >= 0.0 && resample_period > 0.0 && filter_tau > 0.0)) {
        throw std::invalid_argument("ForecastConfig: sigma60 >= 0, positive resample period and filter tau");
    }
    if (!(taper_floor >= 0.0 && taper_floor <= 1.0 && taper_t0 > 0.0 && taper_t1 > taper_t0)) {
        throw std::invalid_argument("ForecastConfig: invalid taper anchors");
    }
    if (!(block_error >= 0.0)) {
        throw std::invalid_argument("ForecastConfig: block_error must be >= 0");
    }
}

double raw_sigma(const ForecastConfig& cfg) {
    if (!cfg.compensate_filter) {
        return cfg.sigma60;
    }
    // e(t) within a hold interval: e_raw + (e_start - e_raw) * exp(-s/tau).
    // Averaging E[e^2] over the interval with i.i.d. draws gives the factor below.
    const double t = cfg.resample_period;
    const double tau = cfg.filter_tau;
    const double r = std::exp(-t / tau);
    const double mean_decay = tau / t * (1.0 - r);
    const double mean_decay_sq = tau / (2.0 * t) * (1.0 - r * r);
    const double start_var = (1.0 - r) / (1.0 + r);  // stationary E[e_start^2] / sigma^2
    const double ratio = 1.0 - 2.0 * mean_decay + mean_decay_sq + mean_decay_sq * start_var;
    return cfg.sigma60 / std::sqrt(ratio);
}

double taper(double lead_seconds, const ForecastConfig& cfg) {
    const double s = std::clamp((lead_seconds - cfg.taper_t0) / (cfg.taper_t1 - cfg.taper_t0), 0.0, 1.0);
    return cfg.taper_floor + (1.0 - cfg.taper_floor) * s;
}

void advance_error(ForecastContext& ctx, double dt, const ForecastConfig& cfg) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("advance_error: dt must be positive");
    }
    if (!ctx.started || ctx.since_resample + 1e-9 >= cfg.resample_period) {
        std::normal_distribution<double> normal(0.0, 1.0);
        ctx.e_raw = raw_sigma(cfg) * normal(ctx.rng);
        ctx.since_resample = 0.0;
        ctx.started = true;
    }
    ctx.e = ctx.e_raw + (ctx.e - ctx.e_raw) * std::exp(-dt / cfg.filter_tau);
    ctx.since_resample += dt;
}

std::vector<double> nowcast_preview(const std::vector<double>& future_true, double e, double t_mpc,
                                    const ForecastConfig& cfg) {
    std::vector<double> out(future_true.size());
    for (std::size_t i = 0; i < future_true.size(); ++i) {
        const double lead = t_mpc * static_cast<double>(i + 1);
        out[i] = std::max(0.0, future_true[i] * (1.0 + taper(lead, cfg) * e));
    }
    return out;
}

double draw_block_error(std::mt19937_64& rng, const ForecastConfig& cfg) {
    if (cfg.block_kind == BlockErrorKind::uniform) {
        std::uniform_real_distribution<double> u(-cfg.block_error, cfg.block_error);
        return u(rng);
    }
    std::normal_distribution<double> n(0.0, cfg.block_error);
    return n(rng);
}

double block_forecast(double true_window_mean, double delta) {
    if (!(true_window_mean >= 0.0)) {
        throw std::invalid_argument("block_forecast: window mean must be >= 0");
    }
    return std::max(0.0, true_window_mean * (1.0 + delta));
}

}  // namespace hpv::forecast
