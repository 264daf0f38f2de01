#pragma once

#include <span>
#include <vector>

#include "loam/util/rng.hpp"

namespace loam {

// Parametric model of one plan's execution-cost distribution. Log-normal is
// the shipped family; the deviance machinery below is templated on the
// distribution type, so other families plug in at compile time as long as
// they provide pdf/cdf/mean/log_mean/log_sd.
struct LogNormalDist {
    double mu = 0.0;     // mean of log cost
    double sigma = 0.0;  // sd of log cost, >= 0
    int n_samples_fit = 0;

    double pdf(double x) const;
    double cdf(double x) const;
    double mean() const;  // exp(mu + sigma^2/2)
    double sample(Rng& rng) const { return rng.lognormal(mu, sigma); }

    double log_mean() const { return mu; }
    double log_sd() const { return sigma; }
};

// Maximum-likelihood fit: mu = mean of logs, sigma = population sd of logs.
// Requires >= 2 samples, all positive.
LogNormalDist fit_lognormal(std::span<const double> costs);

// Two-sided one-sample Kolmogorov-Smirnov p-value of `costs` against the
// CDF of `dist` (asymptotic approximation with the finite-n correction).
// Requires >= 5 samples.
double ks_test(std::span<const double> costs, const LogNormalDist& dist);

// K-S statistic alone (max CDF discrepancy), same preconditions.
double ks_statistic(std::span<const double> costs, const LogNormalDist& dist);

}  // namespace loam
