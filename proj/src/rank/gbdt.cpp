#include "loam/rank/gbdt.hpp"

#include <algorithm>
#include <numeric>

#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

namespace loam {

namespace {

struct SplitResult {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double subset_mean(const Eigen::VectorXd& r, const std::vector<int>& idx) {
    double s = 0.0;
    for (int i : idx) s += r[i];
    return s / static_cast<double>(idx.size());
}

SplitResult best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& r,
                       const std::vector<int>& idx, int min_leaf) {
    SplitResult best;
    const int n = static_cast<int>(idx.size());
    double total = 0.0, total_sq = 0.0;
    for (int i : idx) {
        total += r[i];
        total_sq += r[i] * r[i];
    }
    const double parent_sse = total_sq - total * total / n;

    std::vector<std::pair<double, double>> vals(static_cast<std::size_t>(n));  // (feature, residual)
    for (int f = 0; f < x.cols(); ++f) {
        for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = {x(idx[static_cast<std::size_t>(i)], f), r[idx[static_cast<std::size_t>(i)]]};
        std::sort(vals.begin(), vals.end());
        if (vals.front().first == vals.back().first) continue;

        double left_sum = 0.0, left_sq = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double v = vals[static_cast<std::size_t>(i)].second;
            left_sum += v;
            left_sq += v * v;
            const int n_left = i + 1;
            const int n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            if (vals[static_cast<std::size_t>(i)].first == vals[static_cast<std::size_t>(i + 1)].first) continue;

            const double right_sum = total - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / n_left) +
                               (right_sq - right_sum * right_sum / n_right);
            const double gain = parent_sse - sse;
            if (gain > best.gain + 1e-12) {
                best.gain = gain;
                best.feature = f;
                best.threshold = 0.5 * (vals[static_cast<std::size_t>(i)].first +
                                        vals[static_cast<std::size_t>(i + 1)].first);
            }
        }
    }
    return best;
}

}  // namespace

void GbdtRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const GbdtConfig& config) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw ArgumentError("GbdtRegressor::fit: empty or mismatched training data");
    }
    trees_.clear();
    learning_rate_ = config.learning_rate;
    base_prediction_ = y.mean();

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), base_prediction_);
    Rng rng(config.rng_seed);

    for (int t = 0; t < config.n_trees; ++t) {
        const Eigen::VectorXd residual = y - pred;

        std::vector<int> rows(static_cast<std::size_t>(x.rows()));
        std::iota(rows.begin(), rows.end(), 0);
        if (config.subsample < 1.0) {
            rng.shuffle(rows);
            rows.resize(std::max<std::size_t>(
                1, static_cast<std::size_t>(config.subsample * static_cast<double>(x.rows()))));
            std::sort(rows.begin(), rows.end());
        }

        Tree tree;
        // Recursive build via explicit stack of (node index, rows, depth).
        struct Work {
            int node;
            std::vector<int> rows;
            int depth;
        };
        tree.push_back({});
        std::vector<Work> stack;
        stack.push_back({0, rows, 0});
        while (!stack.empty()) {
            Work w = std::move(stack.back());
            stack.pop_back();
            const bool can_split = w.depth < config.max_depth &&
                                   static_cast<int>(w.rows.size()) >= 2 * config.min_samples_leaf;
            SplitResult split;
            if (can_split) split = best_split(x, residual, w.rows, config.min_samples_leaf);
            if (!can_split || split.feature < 0) {
                tree[static_cast<std::size_t>(w.node)].feature = -1;
                tree[static_cast<std::size_t>(w.node)].value = subset_mean(residual, w.rows);
                continue;
            }
            std::vector<int> left_rows, right_rows;
            for (int i : w.rows) {
                (x(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
            }
            const int left_index = static_cast<int>(tree.size());
            const int right_index = left_index + 1;
            tree.push_back({});
            tree.push_back({});
            Node& node = tree[static_cast<std::size_t>(w.node)];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = left_index;
            node.right = right_index;
            stack.push_back({left_index, std::move(left_rows), w.depth + 1});
            stack.push_back({right_index, std::move(right_rows), w.depth + 1});
        }

        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            pred[i] += learning_rate_ * tree_predict(tree, x.row(i));
        }
        trees_.push_back(std::move(tree));
    }
    trained_ = true;
}

double GbdtRegressor::tree_predict(const Tree& tree, const Eigen::RowVectorXd& x) const {
    int at = 0;
    while (tree[static_cast<std::size_t>(at)].feature >= 0) {
        const Node& n = tree[static_cast<std::size_t>(at)];
        at = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return tree[static_cast<std::size_t>(at)].value;
}

double GbdtRegressor::predict_row(const Eigen::RowVectorXd& x) const {
    if (!trained_) throw PreconditionError("GbdtRegressor::predict: not trained");
    double out = base_prediction_;
    for (const auto& tree : trees_) out += learning_rate_ * tree_predict(tree, x);
    return out;
}

Eigen::VectorXd GbdtRegressor::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row(i));
    return out;
}

}  // namespace loam
