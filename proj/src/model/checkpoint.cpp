#include "loam/model/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "loam/util/errors.hpp"

namespace loam {

using nlohmann::json;

namespace {
constexpr int kCheckpointVersion = 1;
}

TrainedModel::TrainedModel(PredictorParams params, FeatureLayout layout, AblationMode ablation,
                           std::vector<EpochStats> history)
    : params_(std::move(params)),
      layout_(std::move(layout)),
      ablation_(ablation),
      history_(std::move(history)) {}

ForwardResult TrainedModel::predict(const PlanFeatureTensor& tensor) const {
    if (tensor.layout_hash != layout_.content_hash()) {
        throw DataError("TrainedModel::predict: tensor encoded with a different layout");
    }
    if (ablation_ == AblationMode::NoLoad) {
        PlanFeatureTensor zeroed = tensor;
        zero_environment_span(zeroed, layout_);
        return forward(params_, zeroed);
    }
    return forward(params_, tensor);
}

void TrainedModel::save(const std::string& path) const {
    json j;
    j["checkpoint_version"] = kCheckpointVersion;
    j["layout"] = json::parse(layout_.to_json_string());
    j["layout_hash"] = layout_.content_hash();
    j["ablation"] = to_string(ablation_);
    const auto& cfg = params_.config();
    j["config"] = {{"tcn_channels", cfg.tcn_channels},
                   {"pooling", cfg.pooling == Pooling::Max ? "max" : "mean"},
                   {"embedding_dim", cfg.embedding_dim},
                   {"domain_hidden", cfg.domain_hidden}};
    j["feature_dim"] = params_.feature_dim();
    const Eigen::VectorXd flat = params_.flatten();
    std::vector<double> weights(flat.data(), flat.data() + flat.size());
    j["weights"] = std::move(weights);

    json hist = json::array();
    for (const auto& e : history_) {
        hist.push_back({{"epoch", e.epoch},
                        {"loss_cost", e.loss_cost},
                        {"loss_domain", e.loss_domain},
                        {"loss_total", e.loss_total},
                        {"domain_accuracy", e.domain_accuracy},
                        {"w_c", e.w_c},
                        {"w_d", e.w_d},
                        {"lambda", e.lambda},
                        {"lr", e.lr}});
    }
    j["history"] = std::move(hist);

    std::ofstream out(path);
    if (!out) throw DataError("TrainedModel::save: cannot write " + path);
    out << j.dump() << '\n';
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("TrainedModel::load: cannot read " + path);
    json j = json::parse(in);
    if (j.at("checkpoint_version").get<int>() != kCheckpointVersion) {
        throw DataError("TrainedModel::load: unsupported checkpoint version");
    }
    FeatureLayout layout = FeatureLayout::from_json_string(j.at("layout").dump());
    if (j.at("layout_hash").get<std::uint64_t>() != layout.content_hash()) {
        throw DataError("TrainedModel::load: layout hash does not match embedded layout");
    }

    PredictorConfig cfg;
    cfg.tcn_channels = j.at("config").at("tcn_channels").get<std::vector<int>>();
    cfg.pooling = j.at("config").at("pooling").get<std::string>() == "max" ? Pooling::Max
                                                                           : Pooling::Mean;
    cfg.embedding_dim = j.at("config").at("embedding_dim").get<int>();
    cfg.domain_hidden = j.at("config").at("domain_hidden").get<int>();

    PredictorParams params(cfg, j.at("feature_dim").get<int>(), 0);
    const auto weights = j.at("weights").get<std::vector<double>>();
    Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(
        weights.data(), static_cast<Eigen::Index>(weights.size()));
    params.unflatten(flat);

    std::vector<EpochStats> history;
    for (const auto& e : j.at("history")) {
        EpochStats s;
        s.epoch = e.at("epoch").get<int>();
        s.loss_cost = e.at("loss_cost").get<double>();
        s.loss_domain = e.at("loss_domain").get<double>();
        s.loss_total = e.at("loss_total").get<double>();
        s.domain_accuracy = e.at("domain_accuracy").get<double>();
        s.w_c = e.at("w_c").get<double>();
        s.w_d = e.at("w_d").get<double>();
        s.lambda = e.at("lambda").get<double>();
        s.lr = e.at("lr").get<double>();
        history.push_back(s);
    }

    return TrainedModel(std::move(params), std::move(layout),
                        ablation_from_string(j.at("ablation").get<std::string>()),
                        std::move(history));
}

TrainedModel TrainedModel::load_checked(const std::string& path,
                                        const FeatureLayout& expected_layout) {
    TrainedModel m = load(path);
    if (m.layout_hash() != expected_layout.content_hash()) {
        throw DataError("TrainedModel::load_checked: checkpoint was trained against a different "
                        "layout; refusing to load");
    }
    return m;
}

}  // namespace loam
