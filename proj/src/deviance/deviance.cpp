#include "loam/deviance/deviance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "loam/util/errors.hpp"

namespace loam {

MinDistribution::MinDistribution(std::vector<LogNormalDist> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw ArgumentError("MinDistribution: need at least one component");
}

double MinDistribution::survival(double x) const {
    double s = 1.0;
    for (const auto& c : components_) s *= 1.0 - c.cdf(x);
    return s;
}

double MinDistribution::cdf(double x) const { return 1.0 - survival(x); }

double MinDistribution::pdf(double x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        double term = components_[i].pdf(x);
        if (term == 0.0) continue;
        for (std::size_t j = 0; j < components_.size(); ++j) {
            if (j != i) term *= 1.0 - components_[j].cdf(x);
        }
        total += term;
    }
    return total;
}

MinDistribution min_distribution(std::vector<LogNormalDist> dists) {
    return MinDistribution(std::move(dists));
}

namespace {

struct GridRange {
    double lo;
    double hi;
};

GridRange grid_range(const std::vector<LogNormalDist>& all, double sigma_span) {
    double lo_log = std::numeric_limits<double>::infinity();
    double hi_log = -std::numeric_limits<double>::infinity();
    for (const auto& d : all) {
        if (d.sigma <= 0.0) {
            throw NumericError("deviance quadrature: degenerate distribution (sigma = 0)");
        }
        lo_log = std::min(lo_log, d.mu - sigma_span * d.sigma);
        hi_log = std::max(hi_log, d.mu + sigma_span * d.sigma);
    }
    return {std::exp(lo_log), std::exp(hi_log)};
}

// log-spaced grid with t[0] = 0 prepended so the [0, lo] strip is covered
std::vector<double> make_grid(const GridRange& r, std::size_t n) {
    std::vector<double> t(n + 1);
    t[0] = 0.0;
    const double step = (std::log(r.hi) - std::log(r.lo)) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        t[i + 1] = std::exp(std::log(r.lo) + step * static_cast<double>(i));
    }
    return t;
}

struct QuadResult {
    double expected_deviance;
    double oracle_cost;
};

// One pass of the convolution quadrature at a fixed grid size. Writing the
// appendix integral E[D] = int z f_D(z) dz, f_D(z) = int f_S(x) f_min(x-z) dx,
// with y = x - z gives E[D] = int f_S(x) * [x F_min(x) - M1(x)] dx where
// M1(x) = int_0^x y f_min(y) dy; M1 accumulates as a prefix trapezoid.
QuadResult quadrature_pass(const LogNormalDist& selected, const MinDistribution& others_min,
                           const GridRange& range, std::size_t n) {
    const auto t = make_grid(range, n);
    double m1 = 0.0;              // running int_0^t y f_min(y) dy
    double prev_yf = 0.0;         // y * f_min(y) at previous point
    double prev_dev_term = 0.0;   // f_S(x) (x F_min(x) - M1(x)) at previous point
    double prev_surv_all = 1.0;   // survival of min over all plans at previous point
    double dev = 0.0;
    double oracle = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double x = t[i];
        const double h = x - t[i - 1];
        const double yf = x * others_min.pdf(x);
        m1 += 0.5 * h * (prev_yf + yf);
        const double f_min_cdf = others_min.cdf(x);
        const double dev_term = selected.pdf(x) * (x * f_min_cdf - m1);
        dev += 0.5 * h * (prev_dev_term + dev_term);
        const double surv_all = others_min.survival(x) * (1.0 - selected.cdf(x));
        oracle += 0.5 * h * (prev_surv_all + surv_all);
        prev_yf = yf;
        prev_dev_term = dev_term;
        prev_surv_all = surv_all;
    }
    return {dev, oracle};
}

}  // namespace

DevianceReport expected_deviance(const LogNormalDist& selected,
                                 const std::vector<LogNormalDist>& others,
                                 const QuadratureOptions& opts) {
    DevianceReport rep;
    rep.method = DevianceMethod::Analytic;
    if (others.empty()) {
        rep.expected_deviance = 0.0;
        rep.oracle_expected_cost = selected.mean();
        rep.relative_deviance = 0.0;
        return rep;
    }

    std::vector<LogNormalDist> all = others;
    all.push_back(selected);
    const GridRange range = grid_range(all, opts.sigma_span);
    const MinDistribution others_min(others);

    const double scale_floor = 1e-12 * selected.mean();
    double prev_dev = std::numeric_limits<double>::quiet_NaN();
    double prev_oracle = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = opts.initial_grid; n <= opts.max_grid; n *= 2) {
        const QuadResult q = quadrature_pass(selected, others_min, range, n);
        if (!std::isnan(prev_dev)) {
            const double dev_err = std::fabs(q.expected_deviance - prev_dev) /
                                   std::max(std::fabs(q.expected_deviance), scale_floor);
            const double oracle_err = std::fabs(q.oracle_cost - prev_oracle) /
                                      std::max(std::fabs(q.oracle_cost), scale_floor);
            if (dev_err < opts.rel_tol && oracle_err < opts.rel_tol) {
                rep.expected_deviance = std::max(0.0, q.expected_deviance);
                rep.oracle_expected_cost = q.oracle_cost;
                rep.relative_deviance = rep.expected_deviance / rep.oracle_expected_cost;
                return rep;
            }
        }
        prev_dev = q.expected_deviance;
        prev_oracle = q.oracle_cost;
    }
    throw NumericError("expected_deviance: quadrature did not converge to rel_tol " +
                       std::to_string(opts.rel_tol) + " at max grid " +
                       std::to_string(opts.max_grid) + " (last E[D] = " +
                       std::to_string(prev_dev) + ")");
}

DevianceReport monte_carlo_deviance(const LogNormalDist& selected,
                                    const std::vector<LogNormalDist>& others, std::size_t draws,
                                    Rng& rng) {
    if (draws == 0) throw ArgumentError("monte_carlo_deviance: draws must be positive");
    DevianceReport rep;
    rep.method = DevianceMethod::MonteCarlo;
    double dev_sum = 0.0, dev_sq = 0.0, min_sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double s = selected.sample(rng);
        double m = s;
        for (const auto& d : others) m = std::min(m, d.sample(rng));
        const double dv = s - m;
        dev_sum += dv;
        dev_sq += dv * dv;
        min_sum += m;
    }
    const double n = static_cast<double>(draws);
    rep.expected_deviance = dev_sum / n;
    rep.oracle_expected_cost = min_sum / n;
    rep.relative_deviance = rep.expected_deviance / rep.oracle_expected_cost;
    const double var = std::max(0.0, dev_sq / n - rep.expected_deviance * rep.expected_deviance);
    const double half = 1.96 * std::sqrt(var / n);
    rep.ci95 = std::make_pair(rep.expected_deviance - half, rep.expected_deviance + half);
    return rep;
}

DevianceReport improvement_space(const std::vector<std::vector<double>>& replay_costs,
                                 const QuadratureOptions& opts) {
    if (replay_costs.empty()) throw ArgumentError("improvement_space: no candidates");
    std::vector<LogNormalDist> fitted;
    fitted.reserve(replay_costs.size());
    for (const auto& costs : replay_costs) fitted.push_back(fit_lognormal(costs));
    const LogNormalDist def = fitted.front();
    std::vector<LogNormalDist> others(fitted.begin() + 1, fitted.end());

    // Identical competitors add nothing but break the sigma>0 quadrature
    // precondition when all replays coincide; drop exact duplicates of the
    // default (D contribution is 0 for them).
    std::erase_if(others, [&](const LogNormalDist& d) {
        return d.mu == def.mu && d.sigma == def.sigma && def.sigma == 0.0;
    });
    if (others.empty()) {
        DevianceReport rep;
        rep.expected_deviance = 0.0;
        rep.oracle_expected_cost = def.mean();
        rep.relative_deviance = 0.0;
        return rep;
    }
    return expected_deviance(def, others, opts);
}

SelectionPolicy oracle_policy() {
    return {"oracle", [](const std::vector<LogNormalDist>&, const std::vector<double>& draw, Rng&) {
                return static_cast<std::size_t>(
                    std::min_element(draw.begin(), draw.end()) - draw.begin());
            }};
}

SelectionPolicy best_expected_policy() {
    return {"best_expected",
            [](const std::vector<LogNormalDist>& dists, const std::vector<double>&, Rng&) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < dists.size(); ++i) {
                    if (dists[i].mean() < dists[best].mean()) best = i;
                }
                return best;
            }};
}

SelectionPolicy random_policy() {
    return {"random", [](const std::vector<LogNormalDist>& dists, const std::vector<double>&,
                         Rng& rng) { return static_cast<std::size_t>(rng.uniform_index(dists.size())); }};
}

SelectionPolicy worst_expected_policy() {
    return {"worst_expected",
            [](const std::vector<LogNormalDist>& dists, const std::vector<double>&, Rng&) {
                std::size_t worst = 0;
                for (std::size_t i = 1; i < dists.size(); ++i) {
                    if (dists[i].mean() > dists[worst].mean()) worst = i;
                }
                return worst;
            }};
}

Theorem1Report theorem1_battery(const std::vector<std::vector<LogNormalDist>>& instances,
                                const std::vector<SelectionPolicy>& policies, std::size_t draws,
                                std::uint64_t seed) {
    Theorem1Report report;
    for (const auto& p : policies) report.policy_names.push_back(p.name);
    const SelectionPolicy best = best_expected_policy();
    const SelectionPolicy oracle = oracle_policy();

    for (std::size_t inst = 0; inst < instances.size(); ++inst) {
        const auto& dists = instances[inst];
        Rng rng(derive_seed(seed, "theorem1", inst));
        Theorem1InstanceResult res;
        res.per_policy.resize(policies.size());
        std::vector<double> diff_sum(policies.size(), 0.0), diff_sq(policies.size(), 0.0);
        std::vector<double> dev_sum(policies.size(), 0.0), dev_sq(policies.size(), 0.0);
        double best_sum = 0.0, best_sq = 0.0;

        std::vector<double> draw(dists.size());
        for (std::size_t it = 0; it < draws; ++it) {
            for (std::size_t i = 0; i < dists.size(); ++i) draw[i] = dists[i].sample(rng);
            const double min_cost = *std::min_element(draw.begin(), draw.end());

            const double oracle_dev = draw[oracle.choose(dists, draw, rng)] - min_cost;
            if (oracle_dev != 0.0) res.oracle_identically_zero = false;

            const double best_dev = draw[best.choose(dists, draw, rng)] - min_cost;
            best_sum += best_dev;
            best_sq += best_dev * best_dev;

            for (std::size_t p = 0; p < policies.size(); ++p) {
                const double dev = draw[policies[p].choose(dists, draw, rng)] - min_cost;
                dev_sum[p] += dev;
                dev_sq[p] += dev * dev;
                const double d = dev - best_dev;  // paired difference
                diff_sum[p] += d;
                diff_sq[p] += d * d;
            }
        }

        const double n = static_cast<double>(draws);
        res.best_expected.mean_deviance = best_sum / n;
        res.best_expected.std_error =
            std::sqrt(std::max(0.0, best_sq / n - std::pow(best_sum / n, 2)) / n);
        for (std::size_t p = 0; p < policies.size(); ++p) {
            res.per_policy[p].mean_deviance = dev_sum[p] / n;
            res.per_policy[p].std_error =
                std::sqrt(std::max(0.0, dev_sq[p] / n - std::pow(dev_sum[p] / n, 2)) / n);
            const double mean_diff = diff_sum[p] / n;
            const double se_diff =
                std::sqrt(std::max(0.0, diff_sq[p] / n - mean_diff * mean_diff) / n);
            const bool ok = mean_diff + 3.0 * se_diff >= 0.0;
            res.ordering_ok.push_back(ok);
            if (!ok || !res.oracle_identically_zero || res.best_expected.mean_deviance < 0.0) {
                report.all_ok = false;
            }
        }
        report.instances.push_back(std::move(res));
    }
    return report;
}

}  // namespace loam
