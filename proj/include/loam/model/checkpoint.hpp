#pragma once

#include <string>
#include <vector>

#include "loam/model/train.hpp"

namespace loam {

// A deployable predictor: parameters plus the exact layout they were trained
// against and the ablation mode that must be replayed at inference. A
// checkpoint refuses to load against a different layout.
class TrainedModel {
public:
    TrainedModel() = default;
    TrainedModel(PredictorParams params, FeatureLayout layout, AblationMode ablation,
                 std::vector<EpochStats> history);

    // Verifies the tensor's layout hash and applies the LOAM-NL zeroing
    // before the forward pass. Read-only and safely shareable.
    ForwardResult predict(const PlanFeatureTensor& tensor) const;

    const PredictorParams& params() const { return params_; }
    const FeatureLayout& layout() const { return layout_; }
    AblationMode ablation() const { return ablation_; }
    const std::vector<EpochStats>& history() const { return history_; }
    std::uint64_t layout_hash() const { return layout_.content_hash(); }

    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);
    // Load and verify the checkpoint was trained against `expected_layout`.
    static TrainedModel load_checked(const std::string& path, const FeatureLayout& expected_layout);

private:
    PredictorParams params_;
    FeatureLayout layout_;
    AblationMode ablation_ = AblationMode::Full;
    std::vector<EpochStats> history_;
};

}  // namespace loam
