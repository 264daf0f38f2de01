#pragma once

#include <span>
#include <vector>

namespace loam {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased (n-1)
double stddev(std::span<const double> xs);

// Standard normal CDF.
double normal_cdf(double z);

// Kolmogorov distribution tail Q_KS(t) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

// Two-sided p-value of Student's t with nu degrees of freedom.
double student_t_pvalue(double t, double nu);

// Paired two-sided t-test on differences a[i] - b[i]; returns (t, p).
struct PairedTest {
    double t_stat;
    double p_value;
    double mean_diff;
};
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation (average ranks on ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace loam
