#pragma once

#include <span>
#include <string>
#include <vector>

#include "loam/rank/gbdt.hpp"
#include "loam/rank/signature.hpp"

namespace loam {

// Learned improvement-space estimator: signature features -> estimated
// D(M_d). Min-max normalization bounds are fitted with the model so it can
// be applied to unseen projects.
class RankerModel {
public:
    static RankerModel train(std::span<const PlanSignature> signatures,
                             std::span<const double> labels, int n_source_projects,
                             const GbdtConfig& config = {});

    double estimate(const PlanSignature& sig) const;

    int n_source_projects() const { return n_source_projects_; }

private:
    Eigen::VectorXd normalize(const Eigen::VectorXd& features) const;

    GbdtRegressor booster_;
    Eigen::VectorXd feat_lo_;
    Eigen::VectorXd feat_hi_;
    int n_source_projects_ = 0;
};

struct ProjectRankEntry {
    std::string project_id;
    double mean_estimated_improvement = 0.0;
};

// Projects holding the signatures of their sampled workloads, ranked by mean
// estimated D(M_d), descending; ties break by project id.
struct ProjectWorkloadSample {
    std::string project_id;
    std::vector<PlanSignature> signatures;
};

std::vector<ProjectRankEntry> rank_projects(const RankerModel& model,
                                            std::span<const ProjectWorkloadSample> projects);

}  // namespace loam
