#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loam/deviance/lognormal.hpp"

namespace loam {

// Density of C* = min over a set of independent plan-cost distributions:
//   f(x) = sum_C f_C(x) * prod_{C' != C} [1 - F_{C'}(x)].
// Pointwise evaluable; cdf comes from the exact survival product.
class MinDistribution {
public:
    explicit MinDistribution(std::vector<LogNormalDist> components);

    double pdf(double x) const;
    double cdf(double x) const;
    double survival(double x) const;

    const std::vector<LogNormalDist>& components() const { return components_; }

private:
    std::vector<LogNormalDist> components_;
};

MinDistribution min_distribution(std::vector<LogNormalDist> dists);

enum class DevianceMethod { Analytic, MonteCarlo };

struct DevianceReport {
    double expected_deviance = 0.0;
    double relative_deviance = 0.0;
    double oracle_expected_cost = 0.0;  // E[min over all candidate plans]
    DevianceMethod method = DevianceMethod::Analytic;
    std::optional<std::pair<double, double>> ci95;
};

struct QuadratureOptions {
    double rel_tol = 1e-4;
    double sigma_span = 8.0;  // grid covers mu +- sigma_span * sigma of every component
    std::size_t initial_grid = 1024;
    std::size_t max_grid = 1 << 20;
};

// Expected deviance of the plan with distribution `selected` against the
// competing candidates `others`:
//   E[D] = integral_0^inf z f_D(z) dz,   f_D(z) = conv(f_selected, f_min),
// with the D = 0 mass on {C* > C_selected} handled by the case split.
// Evaluated by adaptive trapezoid quadrature on a log-spaced grid; throws
// NumericError if the tolerance is not met at the maximum grid size.
// Empty `others` means no competitor: deviance 0, oracle cost = E[selected].
DevianceReport expected_deviance(const LogNormalDist& selected,
                                 const std::vector<LogNormalDist>& others,
                                 const QuadratureOptions& opts = {});

// Monte-Carlo estimate of the same quantity with a 95% CI; the independent
// cross-check for the analytic route.
DevianceReport monte_carlo_deviance(const LogNormalDist& selected,
                                    const std::vector<LogNormalDist>& others, std::size_t draws,
                                    Rng& rng);

// D(M_d): fit a cost distribution per candidate from replay samples and
// return the expected deviance of the default plan (index 0) against the
// rest. `replay_costs[i]` holds the replayed costs of candidate i.
DevianceReport improvement_space(const std::vector<std::vector<double>>& replay_costs,
                                 const QuadratureOptions& opts = {});

// A plan-selection policy for the Theorem 1 battery: picks a candidate index
// given the distributions and (for the oracle) the realized cost draw.
struct SelectionPolicy {
    std::string name;
    std::function<std::size_t(const std::vector<LogNormalDist>&, const std::vector<double>& draw,
                              Rng&)>
        choose;
};

SelectionPolicy oracle_policy();         // per-draw argmin; deviance identically 0
SelectionPolicy best_expected_policy();  // argmin of analytic means (M_b)
SelectionPolicy random_policy();
SelectionPolicy worst_expected_policy();

struct Theorem1Cell {
    double mean_deviance = 0.0;
    double std_error = 0.0;
};

struct Theorem1InstanceResult {
    std::vector<Theorem1Cell> per_policy;  // aligned with the policy list
    Theorem1Cell best_expected;            // M_b reference
    bool oracle_identically_zero = true;
    // Per policy: mean(D_policy - D_best) + 3*SE >= 0 on paired draws.
    std::vector<bool> ordering_ok;
};

struct Theorem1Report {
    std::vector<std::string> policy_names;
    std::vector<Theorem1InstanceResult> instances;
    bool all_ok = true;
};

// Runs every policy (plus the internal M_o / M_b references) over each
// instance with `draws` paired Monte-Carlo draws and verifies the Theorem 1
// ordering E[D(M)] >= E[D(M_b)] >= E[D(M_o)] = 0 within 3-sigma.
Theorem1Report theorem1_battery(const std::vector<std::vector<LogNormalDist>>& instances,
                                const std::vector<SelectionPolicy>& policies, std::size_t draws,
                                std::uint64_t seed);

}  // namespace loam
