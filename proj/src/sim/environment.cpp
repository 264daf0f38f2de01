#include "loam/sim/environment.hpp"

#include <algorithm>
#include <cmath>

namespace loam {

namespace {

double stationary_draw(const MetricProcessParams& p, double variance_scale, Rng& rng) {
    const double sd = p.stationary_sd * variance_scale;
    double x = sd > 0.0 ? rng.normal(p.mean, sd) : p.mean;
    if (p.clamp01) x = std::clamp(x, 0.0, 1.0);
    return x;
}

double ar1_step(const MetricProcessParams& p, double variance_scale, double x, Rng& rng) {
    const double sd = p.stationary_sd * variance_scale;
    double next = p.mean + p.phi * (x - p.mean);
    if (sd > 0.0) {
        const double innovation_sd = sd * std::sqrt(1.0 - p.phi * p.phi);
        next += rng.normal(0.0, innovation_sd);
    }
    if (p.clamp01) next = std::clamp(next, 0.0, 1.0);
    return next;
}

}  // namespace

EnvironmentProcess::EnvironmentProcess(const EnvironmentModelParams& params) : params_(params) {
    state_[0] = params_.cpu_idle.mean;
    state_[1] = params_.io_wait.mean;
    state_[2] = params_.log_load5.mean;
    state_[3] = params_.mem_usage.mean;
}

void EnvironmentProcess::reset(Rng& rng) {
    state_[0] = stationary_draw(params_.cpu_idle, params_.variance_scale, rng);
    state_[1] = stationary_draw(params_.io_wait, params_.variance_scale, rng);
    state_[2] = stationary_draw(params_.log_load5, params_.variance_scale, rng);
    state_[3] = stationary_draw(params_.mem_usage, params_.variance_scale, rng);
    initialized_ = true;
}

EnvironmentVector EnvironmentProcess::step(Rng& rng) {
    if (!initialized_) reset(rng);
    state_[0] = ar1_step(params_.cpu_idle, params_.variance_scale, state_[0], rng);
    state_[1] = ar1_step(params_.io_wait, params_.variance_scale, state_[1], rng);
    state_[2] = ar1_step(params_.log_load5, params_.variance_scale, state_[2], rng);
    state_[3] = ar1_step(params_.mem_usage, params_.variance_scale, state_[3], rng);
    return current();
}

EnvironmentVector EnvironmentProcess::current() const {
    EnvironmentVector e;
    e.cpu_idle = state_[0];
    e.io_wait = state_[1];
    e.load5 = std::exp(state_[2]);
    e.mem_usage = state_[3];
    return e;
}

std::vector<EnvironmentVector> EnvironmentProcess::trace(std::size_t n_ticks, Rng& rng) {
    std::vector<EnvironmentVector> out;
    out.reserve(n_ticks);
    for (std::size_t i = 0; i < n_ticks; ++i) out.push_back(step(rng));
    return out;
}

EnvironmentVector sample_environment(const EnvironmentModelParams& params, std::int64_t t,
                                     Rng& rng) {
    (void)t;
    EnvironmentProcess proc(params);
    proc.reset(rng);
    return proc.current();
}

}  // namespace loam
