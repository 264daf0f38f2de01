#include "loam/deviance/lognormal.hpp"

#include <algorithm>
#include <cmath>

#include "loam/util/errors.hpp"
#include "loam/util/stats.hpp"

namespace loam {

double LogNormalDist::pdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (sigma <= 0.0) throw NumericError("LogNormalDist::pdf: degenerate sigma = 0");
    const double z = (std::log(x) - mu) / sigma;
    return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * M_PI));
}

double LogNormalDist::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (sigma <= 0.0) return std::log(x) >= mu ? 1.0 : 0.0;
    return normal_cdf((std::log(x) - mu) / sigma);
}

double LogNormalDist::mean() const { return std::exp(mu + 0.5 * sigma * sigma); }

LogNormalDist fit_lognormal(std::span<const double> costs) {
    if (costs.size() < 2) throw DataError("fit_lognormal: need at least 2 samples");
    double sum = 0.0;
    bool all_equal = true;
    for (double c : costs) {
        if (!(c > 0.0)) throw DataError("fit_lognormal: samples must be positive");
        if (c != costs.front()) all_equal = false;
        sum += std::log(c);
    }
    if (all_equal) return {std::log(costs.front()), 0.0, static_cast<int>(costs.size())};
    const double n = static_cast<double>(costs.size());
    const double mu = sum / n;
    double ss = 0.0;
    for (double c : costs) {
        const double d = std::log(c) - mu;
        ss += d * d;
    }
    return {mu, std::sqrt(ss / n), static_cast<int>(costs.size())};
}

double ks_statistic(std::span<const double> costs, const LogNormalDist& dist) {
    if (costs.size() < 5) throw DataError("ks_statistic: need at least 5 samples");
    std::vector<double> sorted(costs.begin(), costs.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d_max = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = dist.cdf(sorted[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d_max = std::max({d_max, hi, lo});
    }
    return d_max;
}

double ks_test(std::span<const double> costs, const LogNormalDist& dist) {
    const double d = ks_statistic(costs, dist);
    const double sqrt_n = std::sqrt(static_cast<double>(costs.size()));
    const double t = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    return kolmogorov_q(t);
}

}  // namespace loam
