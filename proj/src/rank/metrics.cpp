#include "loam/rank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "loam/util/errors.hpp"

namespace loam {

namespace {

std::vector<std::size_t> truth_order(std::span<const double> scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    return idx;
}

double gain(double rel, double rel_clip) { return std::exp2(std::min(rel, rel_clip)) - 1.0; }

double dcg(std::span<const double> rels, std::size_t k, double rel_clip) {
    double total = 0.0;
    for (std::size_t i = 0; i < k && i < rels.size(); ++i) {
        total += gain(rels[i], rel_clip) / std::log2(static_cast<double>(i) + 2.0);
    }
    return total;
}

void check_kn(std::size_t size, std::size_t k, std::size_t n) {
    if (k == 0 || n == 0) throw ArgumentError("ranking metric: k and n must be positive");
    if (k > size || n > size) throw ArgumentError("ranking metric: k/n exceed project count");
}

}  // namespace

double recall_at(std::span<const std::size_t> ranking, std::span<const double> truth_scores,
                 std::size_t k, std::size_t n) {
    check_kn(ranking.size(), k, n);
    const auto order = truth_order(truth_scores);
    std::set<std::size_t> true_top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (true_top.count(ranking[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double ndcg_at(std::span<const std::size_t> ranking, std::span<const double> truth_scores,
               std::size_t k, double rel_clip) {
    check_kn(ranking.size(), k, 1);
    std::vector<double> rels;
    rels.reserve(k);
    for (std::size_t i = 0; i < k; ++i) rels.push_back(truth_scores[ranking[i]]);

    std::vector<double> ideal(truth_scores.begin(), truth_scores.end());
    std::sort(ideal.rbegin(), ideal.rend());

    const double idcg = dcg(ideal, k, rel_clip);
    if (idcg == 0.0) return 0.0;
    return dcg(rels, k, rel_clip) / idcg;
}

RandomBaselines random_baselines(std::span<const double> truth_scores, std::size_t k,
                                 std::size_t n, double rel_clip) {
    check_kn(truth_scores.size(), k, n);
    const double big_n = static_cast<double>(truth_scores.size());

    RandomBaselines out;
    out.expected_recall = static_cast<double>(k) / big_n;

    double mean_gain = 0.0;
    for (double rel : truth_scores) mean_gain += gain(rel, rel_clip);
    mean_gain /= big_n;

    double expected_dcg = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        expected_dcg += mean_gain / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<double> ideal(truth_scores.begin(), truth_scores.end());
    std::sort(ideal.rbegin(), ideal.rend());
    const double idcg = dcg(ideal, k, rel_clip);
    out.expected_ndcg = idcg == 0.0 ? 0.0 : expected_dcg / idcg;
    return out;
}

}  // namespace loam
