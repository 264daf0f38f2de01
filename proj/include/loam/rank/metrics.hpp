#pragma once

#include <cstddef>
#include <span>

namespace loam {

// Recall@(k,n): fraction of the n true-best projects (highest truth score,
// ties to the lower index) appearing in the ranking's top k.
double recall_at(std::span<const std::size_t> ranking, std::span<const double> truth_scores,
                 std::size_t k, std::size_t n);

// NDCG@k with rel_i the truth score of the project ranked at position i,
// clipped at rel_clip before exponentiation: DCG = sum (2^rel - 1)/log2(i+1),
// IDCG from the perfect ordering. Returns 0 when IDCG is 0.
double ndcg_at(std::span<const std::size_t> ranking, std::span<const double> truth_scores,
               std::size_t k, double rel_clip = 30.0);

struct RandomBaselines {
    double expected_recall = 0.0;  // k / N
    double expected_ndcg = 0.0;
};

// Closed-form expectations for a uniformly random permutation of N projects:
// E[Recall@(k,n)] = k/N and E[NDCG@k] = sum_i (mean_j 2^rel_j - 1)/log2(i+1)
// divided by IDCG@k.
RandomBaselines random_baselines(std::span<const double> truth_scores, std::size_t k,
                                 std::size_t n, double rel_clip = 30.0);

}  // namespace loam
