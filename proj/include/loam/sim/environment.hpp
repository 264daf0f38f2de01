#pragma once

#include <cstdint>
#include <vector>

#include "loam/sim/environment_vector.hpp"
#include "loam/util/rng.hpp"

namespace loam {

// AR(1) mean-reverting process for one metric:
//   x_{t+1} = mean + phi * (x_t - mean) + eps,  eps ~ N(0, innovation_sd^2),
// started from the stationary distribution. `stationary_sd` parameterizes
// the innovation as innovation_sd = stationary_sd * sqrt(1 - phi^2), so zero
// stationary_sd degenerates to a constant trace at `mean`.
struct MetricProcessParams {
    double mean = 0.5;
    double stationary_sd = 0.1;
    double phi = 0.8;
    bool clamp01 = true;  // bounded metrics clamp to [0,1]; log-load5 does not
};

// The four-metric environment model. LOAD5 evolves in log space; its params
// describe log(load5). The normalization bounds for the LOAD5 feature are
// part of the cost-oracle spec, not of the process.
struct EnvironmentModelParams {
    MetricProcessParams cpu_idle{0.5, 0.12, 0.8, true};
    MetricProcessParams io_wait{0.05, 0.012, 0.8, true};
    MetricProcessParams log_load5{0.55, 0.5, 0.8, false};  // exp(0.55) ~ 1.7
    MetricProcessParams mem_usage{0.5, 0.12, 0.8, true};

    // Multiplies every stationary_sd; 0 freezes the environment at its means.
    double variance_scale = 1.0;
};

class EnvironmentProcess {
public:
    explicit EnvironmentProcess(const EnvironmentModelParams& params);

    // Draws the initial state from the stationary distribution.
    void reset(Rng& rng);

    // Advances one tick (one 20-second sample) and returns the snapshot.
    EnvironmentVector step(Rng& rng);

    EnvironmentVector current() const;

    std::vector<EnvironmentVector> trace(std::size_t n_ticks, Rng& rng);

private:
    EnvironmentModelParams params_;
    double state_[4];  // cpu_idle, io_wait, log_load5, mem_usage
    bool initialized_ = false;
};

// One draw at time index t of a fresh stationary process; the module-level
// sampling entry point. Consecutive t values do not share state — use an
// EnvironmentProcess for an autocorrelated trace.
EnvironmentVector sample_environment(const EnvironmentModelParams& params, std::int64_t t,
                                     Rng& rng);

}  // namespace loam
