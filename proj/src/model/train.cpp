#include "loam/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

namespace loam {

double warmup_lambda(int epoch, int total_epochs) {
    const double p = total_epochs <= 1 ? 1.0 : static_cast<double>(epoch) /
                                                   static_cast<double>(total_epochs);
    return 2.0 / (1.0 + std::exp(-10.0 * p)) - 1.0;
}

void apply_ablation(AblationMode mode, TrainConfig& config, TrainingCorpus& corpus,
                    const FeatureLayout& layout) {
    config.ablation = mode;
    if (mode == AblationMode::NoLoad) {
        for (auto& t : corpus.defaults) zero_environment_span(t, layout);
        for (auto& t : corpus.candidates) zero_environment_span(t, layout);
    }
}

namespace {

double cross_entropy(const Eigen::Vector2d& probs, int label) {
    return -std::log(std::max(probs[label], 1e-300));
}

}  // namespace

std::vector<EpochStats> train(PredictorParams& params, const TrainingCorpus& corpus,
                              const TrainConfig& config) {
    if (corpus.defaults.size() != corpus.log_costs.size()) {
        throw ArgumentError("train: defaults/log_costs size mismatch");
    }
    if (corpus.defaults.empty()) throw ConfigError("train: no labeled default plans");
    const bool adversarial = config.ablation == AblationMode::Full ||
                             config.ablation == AblationMode::NoLoad;
    if (adversarial && corpus.candidates.empty()) {
        throw ConfigError("train: adversarial mode needs candidate plans on the other domain");
    }
    if (config.epochs < 1 || config.batch_size < 1) {
        throw ConfigError("train: epochs and batch_size must be positive");
    }

    const std::size_t n_def = corpus.defaults.size();
    const std::size_t n_all = n_def + corpus.candidates.size();
    const bool na_mode = config.ablation == AblationMode::NoAdaptation;

    Rng rng(config.rng_seed);
    std::vector<std::size_t> order(n_all);
    for (std::size_t i = 0; i < n_all; ++i) order[i] = i;

    std::vector<EpochStats> history;
    double running_lc = 0.0, running_ld = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = config.lr0 * std::pow(config.lr_decay, epoch);
        stats.lambda = na_mode ? 0.0 : std::max(0.0, config.lambda_schedule(epoch, config.epochs));
        if (na_mode) {
            stats.w_c = 1.0;
            stats.w_d = 1.0;
        } else if (epoch == 0) {
            stats.w_c = stats.w_d = 0.5;
        } else {
            std::tie(stats.w_c, stats.w_d) = config.weight_rule(running_lc, running_ld);
            if (!(stats.w_c > 0.0) || !(stats.w_d > 0.0)) {
                throw ConfigError("train: weight rule must return positive weights");
            }
        }

        rng.shuffle(order);

        double sum_sq = 0.0, sum_ce = 0.0;
        std::size_t n_correct = 0;
        Gradients grads = Gradients::zeros_like(params);

        for (std::size_t start = 0; start < n_all; start += config.batch_size) {
            const std::size_t end = std::min(n_all, start + config.batch_size);
            std::size_t batch_def = 0;
            for (std::size_t k = start; k < end; ++k) {
                if (order[k] < n_def) ++batch_def;
            }
            const std::size_t batch_all = end - start;

            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = order[k];
                const bool is_default = idx < n_def;
                const PlanFeatureTensor& tensor =
                    is_default ? corpus.defaults[idx] : corpus.candidates[idx - n_def];
                const int label = is_default ? 0 : 1;

                const ForwardTrace trace = forward_traced(params, tensor);

                double d_log_cost = 0.0;
                if (is_default) {
                    const double residual = trace.result.log_cost - corpus.log_costs[idx];
                    sum_sq += residual * residual;
                    d_log_cost = stats.w_c * 2.0 * residual / static_cast<double>(batch_def);
                }

                const Eigen::Vector2d& probs = trace.result.domain_probs;
                sum_ce += cross_entropy(probs, label);
                if ((probs[1] > probs[0] ? 1 : 0) == label) ++n_correct;
                Eigen::Vector2d one_hot = Eigen::Vector2d::Zero();
                one_hot[label] = 1.0;
                const Eigen::Vector2d d_logits =
                    stats.w_d * (probs - one_hot) / static_cast<double>(batch_all);

                backward(params, tensor, trace, d_log_cost, d_logits, stats.lambda, grads);
            }

            // SGD step per mini-batch.
            Eigen::VectorXd flat = params.flatten();
            flat -= stats.lr * grads.flatten();
            params.unflatten(flat);
            grads = Gradients::zeros_like(params);
        }

        stats.loss_cost = sum_sq / static_cast<double>(n_def);
        stats.loss_domain = sum_ce / static_cast<double>(n_all);
        stats.domain_accuracy = static_cast<double>(n_correct) / static_cast<double>(n_all);
        stats.loss_total =
            stats.w_c * stats.loss_cost + (na_mode ? 0.0 : stats.w_d * stats.loss_domain);
        if (!std::isfinite(stats.loss_total)) {
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                               " (L_c = " + std::to_string(stats.loss_cost) +
                               ", L_d = " + std::to_string(stats.loss_domain) +
                               ", lr = " + std::to_string(stats.lr) + ")");
        }
        running_lc = stats.loss_cost;
        running_ld = stats.loss_domain;
        history.push_back(stats);
    }
    return history;
}

void fit_domain_probe(PredictorParams& params, std::span<const PlanFeatureTensor> tensors,
                      std::span<const int> labels, int epochs, double lr) {
    if (tensors.size() != labels.size() || tensors.empty()) {
        throw ArgumentError("fit_domain_probe: mismatched inputs");
    }
    // Cache embeddings once; only the head moves.
    std::vector<Eigen::VectorXd> embeddings;
    embeddings.reserve(tensors.size());
    for (const auto& t : tensors) embeddings.push_back(forward(params, t).embedding);

    const double inv_n = 1.0 / static_cast<double>(tensors.size());
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Eigen::MatrixXd g_w1 = Eigen::MatrixXd::Zero(params.w_dom1.rows(), params.w_dom1.cols());
        Eigen::VectorXd g_b1 = Eigen::VectorXd::Zero(params.b_dom1.size());
        Eigen::MatrixXd g_w2 = Eigen::MatrixXd::Zero(params.w_dom2.rows(), params.w_dom2.cols());
        Eigen::VectorXd g_b2 = Eigen::VectorXd::Zero(params.b_dom2.size());
        for (std::size_t i = 0; i < embeddings.size(); ++i) {
            const Eigen::VectorXd hidden =
                (params.w_dom1 * embeddings[i] + params.b_dom1).array().tanh();
            const Eigen::Vector2d logits = params.w_dom2 * hidden + params.b_dom2;
            const double m = logits.maxCoeff();
            Eigen::Vector2d ex = (logits.array() - m).exp();
            const Eigen::Vector2d probs = ex / ex.sum();
            Eigen::Vector2d one_hot = Eigen::Vector2d::Zero();
            one_hot[labels[i]] = 1.0;
            const Eigen::Vector2d d_logits = (probs - one_hot) * inv_n;
            g_w2 += d_logits * hidden.transpose();
            g_b2 += d_logits;
            Eigen::VectorXd d_hidden = params.w_dom2.transpose() * d_logits;
            d_hidden.array() *= 1.0 - hidden.array().square();
            g_w1 += d_hidden * embeddings[i].transpose();
            g_b1 += d_hidden;
        }
        params.w_dom1 -= lr * g_w1;
        params.b_dom1 -= lr * g_b1;
        params.w_dom2 -= lr * g_w2;
        params.b_dom2 -= lr * g_b2;
    }
}

double domain_accuracy(const PredictorParams& params, std::span<const PlanFeatureTensor> tensors,
                       std::span<const int> labels) {
    if (tensors.size() != labels.size() || tensors.empty()) {
        throw ArgumentError("domain_accuracy: mismatched inputs");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const ForwardResult r = forward(params, tensors[i]);
        const int pred = r.domain_probs[1] > r.domain_probs[0] ? 1 : 0;
        if (pred == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(tensors.size());
}

}  // namespace loam
