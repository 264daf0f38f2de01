#include "loam/rank/ranker.hpp"

#include <algorithm>

#include "loam/util/errors.hpp"

namespace loam {

RankerModel RankerModel::train(std::span<const PlanSignature> signatures,
                               std::span<const double> labels, int n_source_projects,
                               const GbdtConfig& config) {
    if (signatures.empty()) throw ArgumentError("RankerModel::train: empty samples");
    if (signatures.size() != labels.size()) {
        throw ArgumentError("RankerModel::train: samples/labels size mismatch");
    }
    if (n_source_projects < 2) {
        throw ConfigError("RankerModel::train: need samples from at least 2 projects");
    }

    const int dim = signature_feature_dim();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(signatures.size()), dim);
    for (std::size_t i = 0; i < signatures.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = signature_features(signatures[i]).transpose();
    }

    RankerModel model;
    model.n_source_projects_ = n_source_projects;
    model.feat_lo_ = x.colwise().minCoeff();
    model.feat_hi_ = x.colwise().maxCoeff();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::VectorXd row = x.row(i);
        x.row(i) = model.normalize(row).transpose();
    }

    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels.data(),
                                                          static_cast<Eigen::Index>(labels.size()));
    model.booster_.fit(x, y, config);
    return model;
}

Eigen::VectorXd RankerModel::normalize(const Eigen::VectorXd& features) const {
    Eigen::VectorXd out(features.size());
    for (Eigen::Index i = 0; i < features.size(); ++i) {
        const double span = feat_hi_[i] - feat_lo_[i];
        out[i] = span > 0.0 ? std::clamp((features[i] - feat_lo_[i]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

double RankerModel::estimate(const PlanSignature& sig) const {
    const Eigen::VectorXd features = normalize(signature_features(sig));
    return booster_.predict_row(features.transpose());
}

std::vector<ProjectRankEntry> rank_projects(const RankerModel& model,
                                            std::span<const ProjectWorkloadSample> projects) {
    std::vector<ProjectRankEntry> out;
    for (const auto& p : projects) {
        ProjectRankEntry e;
        e.project_id = p.project_id;
        double sum = 0.0;
        for (const auto& sig : p.signatures) sum += model.estimate(sig);
        e.mean_estimated_improvement =
            p.signatures.empty() ? 0.0 : sum / static_cast<double>(p.signatures.size());
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const ProjectRankEntry& a, const ProjectRankEntry& b) {
        if (a.mean_estimated_improvement != b.mean_estimated_improvement) {
            return a.mean_estimated_improvement > b.mean_estimated_improvement;
        }
        return a.project_id < b.project_id;
    });
    return out;
}

}  // namespace loam
