#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace loam {

struct GbdtConfig {
    int n_trees = 150;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 2;
    double subsample = 1.0;  // row fraction per tree
    std::uint64_t rng_seed = 0;
};

// Gradient-boosted regression trees on squared loss, greedy exact splits.
// Deterministic given the config seed.
class GbdtRegressor {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbdtConfig& config);

    double predict_row(const Eigen::RowVectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    bool trained() const { return trained_; }
    int n_trees() const { return static_cast<int>(trees_.size()); }

private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    double tree_predict(const Tree& tree, const Eigen::RowVectorXd& x) const;

    std::vector<Tree> trees_;
    double base_prediction_ = 0.0;
    double learning_rate_ = 0.1;
    bool trained_ = false;
};

}  // namespace loam
