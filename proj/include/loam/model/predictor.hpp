#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "loam/encode/plan_encoder.hpp"

namespace loam {

enum class Pooling : std::uint8_t { Max, Mean };
enum class AblationMode : std::uint8_t { Full, NoAdaptation, NoLoad };

AblationMode ablation_from_string(const std::string& s);
const char* to_string(AblationMode m);

struct PredictorConfig {
    std::vector<int> tcn_channels = {64, 128, 64};
    Pooling pooling = Pooling::Max;
    int embedding_dim = 64;  // n
    int domain_hidden = 32;  // h

    bool operator==(const PredictorConfig&) const = default;
};

// One tree-convolution layer: out_i = tanh(W_self x_i + W_left x_l + W_right x_r + b),
// with missing children contributing zero vectors.
struct TcnLayer {
    Eigen::MatrixXd w_self, w_left, w_right;
    Eigen::VectorXd bias;
};

// Full parameter set of the adaptive predictor: PlanEmb (TCN stack + pooled
// projection), CostPred (one linear head on the log-cost scale) and DomClf
// (two layers to a 2-class softmax) joined by the gradient reversal layer.
class PredictorParams {
public:
    PredictorParams() = default;
    PredictorParams(const PredictorConfig& config, int feature_dim, std::uint64_t init_seed);

    const PredictorConfig& config() const { return config_; }
    int feature_dim() const { return feature_dim_; }

    std::vector<TcnLayer> tcn;
    Eigen::MatrixXd w_embed;
    Eigen::VectorXd b_embed;
    Eigen::RowVectorXd w_cost;  // 1 x n
    double b_cost = 0.0;
    Eigen::MatrixXd w_dom1;
    Eigen::VectorXd b_dom1;
    Eigen::MatrixXd w_dom2;  // 2 x h
    Eigen::VectorXd b_dom2;  // 2

    std::size_t parameter_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);

private:
    PredictorConfig config_;
    int feature_dim_ = 0;
};

struct ForwardResult {
    Eigen::VectorXd embedding;   // e_P
    double log_cost = 0.0;       // cost head output (log scale)
    double cost = 0.0;           // exp(log_cost), the reported estimate
    Eigen::Vector2d domain_probs;  // softmax, sums to 1; index 0 = default
};

// All intermediate activations of one plan's forward pass, kept for backprop.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> layer_out;  // per layer: n_nodes x channels (post-tanh)
    Eigen::VectorXd pooled;
    std::vector<Eigen::Index> argmax;  // per channel, for max pooling
    Eigen::VectorXd embedding;         // post-tanh
    Eigen::Vector2d dom_hidden_unused;
    Eigen::VectorXd dom_hidden;        // post-tanh
    Eigen::Vector2d dom_logits;
    ForwardResult result;
};

// Deterministic forward pass. Throws on layout hash mismatch when the params
// were bound to a layout (see Trainer / Checkpoint).
ForwardResult forward(const PredictorParams& params, const PlanFeatureTensor& tensor);
ForwardTrace forward_traced(const PredictorParams& params, const PlanFeatureTensor& tensor);

// Gradients of a scalar loss with respect to every parameter, same shapes as
// PredictorParams.
struct Gradients {
    std::vector<TcnLayer> tcn;
    Eigen::MatrixXd w_embed;
    Eigen::VectorXd b_embed;
    Eigen::RowVectorXd w_cost;
    double b_cost = 0.0;
    Eigen::MatrixXd w_dom1;
    Eigen::VectorXd b_dom1;
    Eigen::MatrixXd w_dom2;
    Eigen::VectorXd b_dom2;

    static Gradients zeros_like(const PredictorParams& p);
    void add_scaled(const Gradients& other, double scale);
    Eigen::VectorXd flatten() const;
};

// Backprop for one plan. `d_log_cost` is dL/d(log-cost output) and
// `d_logits` is dL/d(domain logits); either may be zero. `grl_lambda`
// multiplies the domain branch's gradient into the embedding by -lambda
// (identity forward, reversed backward).
void backward(const PredictorParams& params, const PlanFeatureTensor& tensor,
              const ForwardTrace& trace, double d_log_cost, const Eigen::Vector2d& d_logits,
              double grl_lambda, Gradients& out);

void zero_environment_span(PlanFeatureTensor& tensor, const FeatureLayout& layout);

}  // namespace loam
