#pragma once

#include <cmath>

namespace loam {

// One snapshot of the four machine-load metrics. cpu_idle, io_wait and
// mem_usage are fractions in [0,1]; load5 is the raw 5-minute load average
// (positive, unbounded) and only becomes a [0,1] feature after log min-max
// normalization in the encoder.
struct EnvironmentVector {
    double cpu_idle = 0.5;
    double io_wait = 0.05;
    double load5 = 1.0;
    double mem_usage = 0.5;

    bool is_finite() const {
        return std::isfinite(cpu_idle) && std::isfinite(io_wait) && std::isfinite(load5) &&
               std::isfinite(mem_usage) && load5 > 0.0;
    }

    bool operator==(const EnvironmentVector&) const = default;
};

}  // namespace loam
