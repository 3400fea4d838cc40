#include "hybridpv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <stdexcept>

#include "csv_util.hpp"
#include "hybridpv/errors.hpp"

namespace hpv::scenario {

double RegulationSignal::value_at(double t) const {
    if (t < activation || t < t0 || samples.empty()) {
        return 0.0;
    }
    const auto k = static_cast<std::size_t>(std::floor((t - t0) / period + 1e-9));
    return samples[std::min(k, samples.size() - 1)];
}

void RegulationSignal::validate() const {
    if (!(period > 0.0 && capacity >= 0.0)) {
        throw std::invalid_argument("RegulationSignal: period must be positive, capacity non-negative");
    }
    const double half = 0.5 * capacity * (1.0 + 1e-9);
    for (double s : samples) {
        if (!(std::abs(s) <= half)) {
            throw DataError("regulation sample exceeds capacity/2");
        }
    }
}

double BaselineSchedule::at(double t) const {
    if (blocks.empty()) {
        return 0.0;
    }
    const double k = std::floor((t - t0) / block_length);
    const auto idx = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(blocks.size() - 1)));
    return blocks[idx];
}

double setpoint_at(double t, const BaselineSchedule& baseline, const RegulationSignal& reg, double scale) {
    return scale * baseline.at(t) + reg.value_at(t);
}

void ReservePolicy::validate() const {
    if (!(base >= 0.0 && relief_cap > 0.0)) {
        throw std::invalid_argument("ReservePolicy: base >= 0 and relief_cap > 0 required");
    }
}

double reserve_target(double reg_now, const ReservePolicy& policy) {
    const double relief = std::max(0.0, reg_now) * policy.base / policy.relief_cap;
    return std::clamp(policy.base - relief, 0.0, policy.base);
}

RegulationSignal synth_regd(const RegdSynthParams& params, std::uint64_t seed) {
    if (!(params.duration > 0.0)) {
        throw std::invalid_argument("synth_regd: duration must be positive");
    }
    constexpr double kPeriod = 2.0;
    const auto n = static_cast<std::size_t>(std::ceil(params.duration / kPeriod)) + 1;
    const double half = 0.5 * params.capacity;
    const double decay = std::exp(-kPeriod / params.reversion_time);
    // Stationary spread of half/2 keeps clipping occasional.
    const double sigma = 0.5 * half * std::sqrt(1.0 - decay * decay);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(n);
    double v = 0.0;
    for (auto& s : x) {
        v = decay * v + sigma * normal(rng);
        s = v;
    }
    // Clip then remove the mean; repeat since re-clipping can shift it.
    for (int pass = 0; pass < 50; ++pass) {
        for (auto& s : x) {
            s = std::clamp(s, -half, half);
        }
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
        if (std::abs(mean) <= 1e-4 * std::max(params.capacity, 1.0)) {
            break;
        }
        for (auto& s : x) {
            s -= mean;
        }
    }
    for (auto& s : x) {
        s = std::clamp(s, -half, half);
    }

    RegulationSignal reg;
    reg.t0 = params.t0;
    reg.period = kPeriod;
    reg.samples = std::move(x);
    reg.capacity = params.capacity;
    reg.activation = params.activation;
    return reg;
}

RegulationSignal load_regulation_csv(const std::filesystem::path& path, double capacity, double activation) {
    const auto table = detail::read_numeric_csv(path);
    const auto& t = table.columns[table.column("t_seconds")];
    const auto& w = table.columns[table.column("reg_watts")];
    if (table.rows < 1) {
        throw DataError(path.string() + ": no regulation samples");
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::abs(t[i] - t[i - 1] - 2.0) > 1e-6) {
            throw DataError(path.string() + ": regulation samples must be 2 s apart (row " + std::to_string(i + 1) +
                            ")");
        }
    }
    RegulationSignal reg;
    reg.t0 = t.front();
    reg.period = 2.0;
    reg.samples = w;
    reg.capacity = capacity;
    reg.activation = activation;
    reg.validate();
    return reg;
}

void write_regulation_csv(const std::filesystem::path& path, const RegulationSignal& reg) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "t_seconds,reg_watts\n" << std::setprecision(17);
    for (std::size_t i = 0; i < reg.samples.size(); ++i) {
        out << reg.t0 + reg.period * static_cast<double>(i) << ',' << reg.samples[i] << '\n';
    }
}

void ThermalParams::validate() const {
    if (!(tau_governor > 0.0 && tau_turbine > 0.0 && tau_reheater > 0.0)) {
        throw std::invalid_argument("ThermalParams: time constants must be positive");
    }
    if (!(f_hp >= 0.0 && f_hp <= 1.0 && ramp_limit > 0.0)) {
        throw std::invalid_argument("ThermalParams: f_hp in [0, 1] and positive ramp limit required");
    }
}

ThermalUnitState thermal_init(double p_ref, const ThermalParams& params) {
    const double target = std::max(0.0, p_ref + params.offset);
    return {target, target, target, target};
}

ThermalUnitState thermal_step(const ThermalUnitState& s, double p_ref, double dt, const ThermalParams& params) {
    if (!(dt > 0.0 && dt <= 1.0)) {
        throw std::invalid_argument("thermal_step: dt must lie in (0, 1]");
    }
    auto lag = [dt](double x, double u, double tau) { return u + (x - u) * std::exp(-dt / tau); };
    ThermalUnitState n;
    n.governor = lag(s.governor, p_ref + params.offset, params.tau_governor);
    n.turbine = lag(s.turbine, n.governor, params.tau_turbine);
    n.reheater = lag(s.reheater, n.turbine, params.tau_reheater);
    const double mech = params.f_hp * n.turbine + (1.0 - params.f_hp) * n.reheater;
    const double max_delta = params.ramp_limit / 60.0 * dt;
    n.output = std::max(0.0, s.output + std::clamp(mech - s.output, -max_delta, max_delta));
    return n;
}

}  // namespace hpv::scenario
