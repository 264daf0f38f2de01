#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "loam/model/predictor.hpp"

namespace loam {

// Canonical domain-adaptation warm-up: lambda(p) = 2/(1+exp(-10 p)) - 1 with
// p = epoch / total.
double warmup_lambda(int epoch, int total_epochs);

struct TrainConfig {
    double lr0 = 0.01;
    double lr_decay = 0.99;  // per epoch
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t rng_seed = 0;
    AblationMode ablation = AblationMode::Full;

    // epoch, total -> lambda >= 0. Ignored (forced 0) under LOAM-NA.
    std::function<double(int, int)> lambda_schedule = warmup_lambda;

    // (running mean L_c, running mean L_d) -> (w_c, w_d), both > 0. The
    // default equalizes the loss magnitudes.
    std::function<std::pair<double, double>(double, double)> weight_rule =
        [](double lc, double ld) {
            const double total = lc + ld;
            if (total <= 0.0) return std::make_pair(0.5, 0.5);
            const double wc = std::clamp(ld / total, 1e-3, 1.0 - 1e-3);
            return std::make_pair(wc, 1.0 - wc);
        };
};

// Training data: executed default plans with log-cost labels, and unexecuted
// candidate plans that carry a domain label only. Candidates never enter the
// cost term; the struct gives them no place to hold a cost label.
struct TrainingCorpus {
    std::vector<PlanFeatureTensor> defaults;
    std::vector<double> log_costs;  // aligned with defaults
    std::vector<PlanFeatureTensor> candidates;
};

struct EpochStats {
    int epoch = 0;
    double loss_cost = 0.0;       // mean squared log-cost error over defaults
    double loss_domain = 0.0;     // mean cross-entropy over both domains
    double loss_total = 0.0;      // w_c * L_c (+ w_d * L_d unless LOAM-NA)
    double domain_accuracy = 0.0;
    double w_c = 0.5;
    double w_d = 0.5;
    double lambda = 0.0;
    double lr = 0.0;
};

// Mini-batch gradient descent on the joint loss
//   L = w_c * mean_{defaults} (log c_hat - log c)^2
//     + w_d * mean_{defaults+candidates} CE(d_hat, d),
// with the gradient reversal layer scaling the domain branch's gradient
// into PlanEmb by -lambda. Deterministic given config.rng_seed. Throws
// NumericError with a diagnostic snapshot if the loss goes non-finite.
//
// Under LOAM-NA the optimized loss reduces to the w_c term; the domain head
// is still fitted as a detached probe (lambda = 0 blocks any influence on
// the embedding) so its accuracy stays measurable.
std::vector<EpochStats> train(PredictorParams& params, const TrainingCorpus& corpus,
                              const TrainConfig& config);

// Applies an ablation: LOAM-NA rewires the config (lambda = 0, domain term
// dropped from the loss), LOAM-NL zeroes the environment span of every
// corpus tensor. The same mode must be carried to inference.
void apply_ablation(AblationMode mode, TrainConfig& config, TrainingCorpus& corpus,
                    const FeatureLayout& layout);

// Fraction of tensors whose domain head picks the right label (0 = default,
// 1 = candidate).
double domain_accuracy(const PredictorParams& params, std::span<const PlanFeatureTensor> tensors,
                       std::span<const int> labels);

// Refits the domain head alone on a frozen embedding (full-batch descent on
// the cross-entropy). This is the measurement protocol for how much domain
// information an embedding still carries: the co-trained head under LOAM-NA
// is only warm-started, so probing to convergence makes the accuracy
// comparison between ablations meaningful.
void fit_domain_probe(PredictorParams& params, std::span<const PlanFeatureTensor> tensors,
                      std::span<const int> labels, int epochs = 400, double lr = 0.1);

}  // namespace loam
