#include "loam/harness/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "loam/util/errors.hpp"
#include "loam/util/hashing.hpp"

namespace loam {

using nlohmann::json;

namespace {

json dist_to_json(const DistSpec& d) {
    static const char* kNames[] = {"constant", "uniform_int", "log_uniform", "uniform"};
    return json{{"kind", kNames[static_cast<int>(d.kind)]}, {"a", d.a}, {"b", d.b}};
}

DistSpec dist_from_json(const json& j) {
    DistSpec d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") d.kind = DistSpec::Kind::Constant;
    else if (kind == "uniform_int") d.kind = DistSpec::Kind::UniformInt;
    else if (kind == "log_uniform") d.kind = DistSpec::Kind::LogUniform;
    else if (kind == "uniform") d.kind = DistSpec::Kind::Uniform;
    else throw ConfigError("unknown distribution kind: " + kind);
    d.a = j.at("a").get<double>();
    d.b = j.at("b").get<double>();
    return d;
}

json metric_to_json(const MetricProcessParams& p) {
    return json{{"mean", p.mean},
                {"stationary_sd", p.stationary_sd},
                {"phi", p.phi},
                {"clamp01", p.clamp01}};
}

MetricProcessParams metric_from_json(const json& j, MetricProcessParams defaults) {
    MetricProcessParams p = defaults;
    if (j.contains("mean")) p.mean = j["mean"].get<double>();
    if (j.contains("stationary_sd")) p.stationary_sd = j["stationary_sd"].get<double>();
    if (j.contains("phi")) p.phi = j["phi"].get<double>();
    if (j.contains("clamp01")) p.clamp01 = j["clamp01"].get<bool>();
    return p;
}

}  // namespace

std::string ExperimentConfig::to_json_string() const {
    json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir;

    json p;
    p["project_id"] = project.project_id;
    p["n_tables"] = project.n_tables;
    p["n_columns_per_table"] = dist_to_json(project.n_columns_per_table);
    p["table_sizes"] = dist_to_json(project.table_sizes);
    p["table_partitions"] = dist_to_json(project.table_partitions);
    p["table_lifespans"] = dist_to_json(project.table_lifespans);
    p["n_templates"] = project.n_templates;
    p["queries_per_day"] = dist_to_json(project.queries_per_day);
    p["n_days"] = project.n_days;
    p["rng_seed"] = project.rng_seed;
    p["planner_misestimation"] = project.planner_misestimation;
    p["template_tables_min"] = project.template_tables_min;
    p["template_tables_max"] = project.template_tables_max;
    p["template_duplicate_prob"] = project.template_duplicate_prob;
    p["template_aggregate_prob"] = project.template_aggregate_prob;
    p["n_filter_constants"] = project.n_filter_constants;
    p["filter_selectivity_lo"] = project.filter_selectivity_lo;
    p["filter_selectivity_hi"] = project.filter_selectivity_hi;
    p["planner_rules"] = {{"merge_join_row_threshold", project.planner_rules.merge_join_row_threshold},
                          {"exchange_row_threshold", project.planner_rules.exchange_row_threshold},
                          {"spool_duplicates", project.planner_rules.spool_duplicates}};
    j["project"] = std::move(p);

    json o;
    json coeffs = json::object();
    for (const auto& [kind, c] : oracle.op_coefficients) {
        coeffs[std::string(to_string(kind))] = c;
    }
    o["op_coefficients"] = std::move(coeffs);
    o["env_sensitivity"] = {oracle.env_sensitivity[0], oracle.env_sensitivity[1],
                            oracle.env_sensitivity[2], oracle.env_sensitivity[3]};
    o["g_floor"] = oracle.g_floor;
    o["noise_sigma"] = oracle.noise_sigma;
    o["load5_log_lo"] = oracle.load5_log_lo;
    o["load5_log_hi"] = oracle.load5_log_hi;
    o["fanout_lo"] = oracle.fanout_lo;
    o["fanout_hi"] = oracle.fanout_hi;
    o["agg_reduction_lo"] = oracle.agg_reduction_lo;
    o["agg_reduction_hi"] = oracle.agg_reduction_hi;
    o["residual_lo"] = oracle.residual_lo;
    o["residual_hi"] = oracle.residual_hi;
    o["max_stage_window_ticks"] = oracle.max_stage_window_ticks;
    o["sort_log_scale"] = oracle.sort_log_scale;
    o["hash_build_side_factor"] = oracle.hash_build_side_factor;
    o["agg_no_exchange_penalty_cap"] = oracle.agg_no_exchange_penalty_cap;
    o["agg_no_exchange_penalty_rows"] = oracle.agg_no_exchange_penalty_rows;
    j["oracle"] = std::move(o);

    j["environment"] = {{"cpu_idle", metric_to_json(environment.cpu_idle)},
                        {"io_wait", metric_to_json(environment.io_wait)},
                        {"log_load5", metric_to_json(environment.log_load5)},
                        {"mem_usage", metric_to_json(environment.mem_usage)},
                        {"variance_scale", environment.variance_scale}};

    j["explorer"] = {{"merge_join_substitution", explorer.knobs.merge_join_substitution},
                     {"join_commutation", explorer.knobs.join_commutation},
                     {"join_reorder_toggle", explorer.knobs.join_reorder_toggle},
                     {"filter_placement", explorer.knobs.filter_placement},
                     {"exchange_elision", explorer.knobs.exchange_elision},
                     {"spool_toggle", explorer.knobs.spool_toggle},
                     {"cardinality_scales", explorer.knobs.cardinality_scales},
                     {"k_max", explorer.k_max},
                     {"max_explore_seconds", explorer.max_explore_seconds}};

    j["predictor"] = {{"tcn_channels", predictor.tcn_channels},
                      {"pooling", predictor.pooling == Pooling::Max ? "max" : "mean"},
                      {"embedding_dim", predictor.embedding_dim},
                      {"domain_hidden", predictor.domain_hidden}};

    j["training"] = {{"lr0", training.lr0},
                     {"lr_decay", training.lr_decay},
                     {"epochs", training.epochs},
                     {"batch_size", training.batch_size},
                     {"max_training_queries", training.max_training_queries},
                     {"max_domain_candidates", training.max_domain_candidates}};

    j["ablation"] = to_string(ablation);
    j["selection_source"] = to_string(selection_source);
    j["replay"] = {{"runs_per_candidate", replay.runs_per_candidate}};
    j["split"] = {{"train_days", split.train_days}, {"test_days", split.test_days}};
    j["hash"] = {{"segments", hash_segments}, {"segment_width", hash_segment_width}};
    j["training_size_sweep"] = training_size_sweep;

    j["project_selection"] = {
        {"n_train_projects", project_selection.n_train_projects},
        {"n_eval_projects", project_selection.n_eval_projects},
        {"queries_per_project", project_selection.queries_per_project},
        {"replays_per_candidate", project_selection.replays_per_candidate},
        {"top_n", project_selection.top_n},
        {"rel_clip", project_selection.rel_clip},
        {"misestimation_lo", project_selection.misestimation_lo},
        {"misestimation_hi", project_selection.misestimation_hi},
        {"thresholds",
         {{"min_queries_per_day", project_selection.thresholds.min_queries_per_day},
          {"min_growth_ratio", project_selection.thresholds.min_growth_ratio},
          {"min_stable_ratio", project_selection.thresholds.min_stable_ratio},
          {"lifespan_floor_days", project_selection.thresholds.lifespan_floor_days},
          {"target_training_queries", project_selection.thresholds.target_training_queries},
          {"growth_horizon_days", project_selection.thresholds.growth_horizon_days}}},
        {"gbdt",
         {{"n_trees", project_selection.gbdt.n_trees},
          {"max_depth", project_selection.gbdt.max_depth},
          {"learning_rate", project_selection.gbdt.learning_rate},
          {"min_samples_leaf", project_selection.gbdt.min_samples_leaf},
          {"subsample", project_selection.gbdt.subsample},
          {"rng_seed", project_selection.gbdt.rng_seed}}}};

    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);

    if (j.contains("project")) {
        const json& p = j["project"];
        c.project.project_id = p.value("project_id", c.project.project_id);
        c.project.n_tables = p.value("n_tables", c.project.n_tables);
        if (p.contains("n_columns_per_table")) c.project.n_columns_per_table = dist_from_json(p["n_columns_per_table"]);
        if (p.contains("table_sizes")) c.project.table_sizes = dist_from_json(p["table_sizes"]);
        if (p.contains("table_partitions")) c.project.table_partitions = dist_from_json(p["table_partitions"]);
        if (p.contains("table_lifespans")) c.project.table_lifespans = dist_from_json(p["table_lifespans"]);
        c.project.n_templates = p.value("n_templates", c.project.n_templates);
        if (p.contains("queries_per_day")) c.project.queries_per_day = dist_from_json(p["queries_per_day"]);
        c.project.n_days = p.value("n_days", c.project.n_days);
        c.project.rng_seed = p.value("rng_seed", c.project.rng_seed);
        c.project.planner_misestimation =
            p.value("planner_misestimation", c.project.planner_misestimation);
        c.project.template_tables_min = p.value("template_tables_min", c.project.template_tables_min);
        c.project.template_tables_max = p.value("template_tables_max", c.project.template_tables_max);
        c.project.template_duplicate_prob =
            p.value("template_duplicate_prob", c.project.template_duplicate_prob);
        c.project.template_aggregate_prob =
            p.value("template_aggregate_prob", c.project.template_aggregate_prob);
        c.project.n_filter_constants = p.value("n_filter_constants", c.project.n_filter_constants);
        c.project.filter_selectivity_lo =
            p.value("filter_selectivity_lo", c.project.filter_selectivity_lo);
        c.project.filter_selectivity_hi =
            p.value("filter_selectivity_hi", c.project.filter_selectivity_hi);
        if (p.contains("planner_rules")) {
            const json& pr = p["planner_rules"];
            c.project.planner_rules.merge_join_row_threshold = pr.value(
                "merge_join_row_threshold", c.project.planner_rules.merge_join_row_threshold);
            c.project.planner_rules.exchange_row_threshold =
                pr.value("exchange_row_threshold", c.project.planner_rules.exchange_row_threshold);
            c.project.planner_rules.spool_duplicates =
                pr.value("spool_duplicates", c.project.planner_rules.spool_duplicates);
        }
    }

    if (j.contains("oracle")) {
        const json& o = j["oracle"];
        if (o.contains("op_coefficients")) {
            // partial override: named operators replace their defaults
            for (const auto& [name, value] : o["op_coefficients"].items()) {
                c.oracle.op_coefficients[operator_kind_from_string(name)] = value.get<double>();
            }
        }
        if (o.contains("env_sensitivity")) {
            for (int i = 0; i < 4; ++i) c.oracle.env_sensitivity[i] = o["env_sensitivity"][static_cast<std::size_t>(i)].get<double>();
        }
        c.oracle.g_floor = o.value("g_floor", c.oracle.g_floor);
        c.oracle.noise_sigma = o.value("noise_sigma", c.oracle.noise_sigma);
        c.oracle.load5_log_lo = o.value("load5_log_lo", c.oracle.load5_log_lo);
        c.oracle.load5_log_hi = o.value("load5_log_hi", c.oracle.load5_log_hi);
        c.oracle.fanout_lo = o.value("fanout_lo", c.oracle.fanout_lo);
        c.oracle.fanout_hi = o.value("fanout_hi", c.oracle.fanout_hi);
        c.oracle.agg_reduction_lo = o.value("agg_reduction_lo", c.oracle.agg_reduction_lo);
        c.oracle.agg_reduction_hi = o.value("agg_reduction_hi", c.oracle.agg_reduction_hi);
        c.oracle.residual_lo = o.value("residual_lo", c.oracle.residual_lo);
        c.oracle.residual_hi = o.value("residual_hi", c.oracle.residual_hi);
        c.oracle.max_stage_window_ticks =
            o.value("max_stage_window_ticks", c.oracle.max_stage_window_ticks);
        c.oracle.sort_log_scale = o.value("sort_log_scale", c.oracle.sort_log_scale);
        c.oracle.hash_build_side_factor =
            o.value("hash_build_side_factor", c.oracle.hash_build_side_factor);
        c.oracle.agg_no_exchange_penalty_cap =
            o.value("agg_no_exchange_penalty_cap", c.oracle.agg_no_exchange_penalty_cap);
        c.oracle.agg_no_exchange_penalty_rows =
            o.value("agg_no_exchange_penalty_rows", c.oracle.agg_no_exchange_penalty_rows);
    }

    if (j.contains("environment")) {
        const json& e = j["environment"];
        if (e.contains("cpu_idle")) c.environment.cpu_idle = metric_from_json(e["cpu_idle"], c.environment.cpu_idle);
        if (e.contains("io_wait")) c.environment.io_wait = metric_from_json(e["io_wait"], c.environment.io_wait);
        if (e.contains("log_load5")) c.environment.log_load5 = metric_from_json(e["log_load5"], c.environment.log_load5);
        if (e.contains("mem_usage")) c.environment.mem_usage = metric_from_json(e["mem_usage"], c.environment.mem_usage);
        c.environment.variance_scale = e.value("variance_scale", c.environment.variance_scale);
    }

    if (j.contains("explorer")) {
        const json& e = j["explorer"];
        c.explorer.knobs.merge_join_substitution =
            e.value("merge_join_substitution", c.explorer.knobs.merge_join_substitution);
        c.explorer.knobs.join_commutation =
            e.value("join_commutation", c.explorer.knobs.join_commutation);
        c.explorer.knobs.join_reorder_toggle =
            e.value("join_reorder_toggle", c.explorer.knobs.join_reorder_toggle);
        c.explorer.knobs.filter_placement =
            e.value("filter_placement", c.explorer.knobs.filter_placement);
        c.explorer.knobs.exchange_elision =
            e.value("exchange_elision", c.explorer.knobs.exchange_elision);
        c.explorer.knobs.spool_toggle = e.value("spool_toggle", c.explorer.knobs.spool_toggle);
        if (e.contains("cardinality_scales")) {
            c.explorer.knobs.cardinality_scales =
                e["cardinality_scales"].get<std::vector<double>>();
        }
        c.explorer.k_max = e.value("k_max", c.explorer.k_max);
        c.explorer.max_explore_seconds =
            e.value("max_explore_seconds", c.explorer.max_explore_seconds);
    }

    if (j.contains("predictor")) {
        const json& p = j["predictor"];
        if (p.contains("tcn_channels")) c.predictor.tcn_channels = p["tcn_channels"].get<std::vector<int>>();
        if (p.contains("pooling")) {
            c.predictor.pooling = p["pooling"].get<std::string>() == "mean" ? Pooling::Mean
                                                                            : Pooling::Max;
        }
        c.predictor.embedding_dim = p.value("embedding_dim", c.predictor.embedding_dim);
        c.predictor.domain_hidden = p.value("domain_hidden", c.predictor.domain_hidden);
    }

    if (j.contains("training")) {
        const json& t = j["training"];
        c.training.lr0 = t.value("lr0", c.training.lr0);
        c.training.lr_decay = t.value("lr_decay", c.training.lr_decay);
        c.training.epochs = t.value("epochs", c.training.epochs);
        c.training.batch_size = t.value("batch_size", c.training.batch_size);
        c.training.max_training_queries =
            t.value("max_training_queries", c.training.max_training_queries);
        c.training.max_domain_candidates =
            t.value("max_domain_candidates", c.training.max_domain_candidates);
    }

    if (j.contains("ablation")) c.ablation = ablation_from_string(j["ablation"].get<std::string>());
    if (j.contains("selection_source")) {
        c.selection_source = env_source_from_string(j["selection_source"].get<std::string>());
    }
    if (j.contains("replay")) {
        c.replay.runs_per_candidate =
            j["replay"].value("runs_per_candidate", c.replay.runs_per_candidate);
    }
    if (j.contains("split")) {
        c.split.train_days = j["split"].value("train_days", c.split.train_days);
        c.split.test_days = j["split"].value("test_days", c.split.test_days);
    }
    if (j.contains("hash")) {
        c.hash_segments = j["hash"].value("segments", c.hash_segments);
        c.hash_segment_width = j["hash"].value("segment_width", c.hash_segment_width);
    }
    if (j.contains("training_size_sweep")) {
        c.training_size_sweep = j["training_size_sweep"].get<std::vector<std::size_t>>();
    }

    if (j.contains("project_selection")) {
        const json& s = j["project_selection"];
        auto& ps = c.project_selection;
        ps.n_train_projects = s.value("n_train_projects", ps.n_train_projects);
        ps.n_eval_projects = s.value("n_eval_projects", ps.n_eval_projects);
        ps.queries_per_project = s.value("queries_per_project", ps.queries_per_project);
        ps.replays_per_candidate = s.value("replays_per_candidate", ps.replays_per_candidate);
        ps.top_n = s.value("top_n", ps.top_n);
        ps.rel_clip = s.value("rel_clip", ps.rel_clip);
        ps.misestimation_lo = s.value("misestimation_lo", ps.misestimation_lo);
        ps.misestimation_hi = s.value("misestimation_hi", ps.misestimation_hi);
        if (s.contains("thresholds")) {
            const json& th = s["thresholds"];
            ps.thresholds.min_queries_per_day =
                th.value("min_queries_per_day", ps.thresholds.min_queries_per_day);
            ps.thresholds.min_growth_ratio =
                th.value("min_growth_ratio", ps.thresholds.min_growth_ratio);
            ps.thresholds.min_stable_ratio =
                th.value("min_stable_ratio", ps.thresholds.min_stable_ratio);
            ps.thresholds.lifespan_floor_days =
                th.value("lifespan_floor_days", ps.thresholds.lifespan_floor_days);
            ps.thresholds.target_training_queries =
                th.value("target_training_queries", ps.thresholds.target_training_queries);
            ps.thresholds.growth_horizon_days =
                th.value("growth_horizon_days", ps.thresholds.growth_horizon_days);
        }
        if (s.contains("gbdt")) {
            const json& g = s["gbdt"];
            ps.gbdt.n_trees = g.value("n_trees", ps.gbdt.n_trees);
            ps.gbdt.max_depth = g.value("max_depth", ps.gbdt.max_depth);
            ps.gbdt.learning_rate = g.value("learning_rate", ps.gbdt.learning_rate);
            ps.gbdt.min_samples_leaf = g.value("min_samples_leaf", ps.gbdt.min_samples_leaf);
            ps.gbdt.subsample = g.value("subsample", ps.gbdt.subsample);
            ps.gbdt.rng_seed = g.value("rng_seed", ps.gbdt.rng_seed);
        }
    }
    return c;
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("ExperimentConfig::save: cannot write " + path);
    out << to_json_string() << '\n';
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("ExperimentConfig::load: cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::string ExperimentConfig::resolved_output_dir() const {
    if (const char* root = std::getenv("LOAM_OUTPUT_ROOT")) {
        return (std::filesystem::path(root) / output_dir).string();
    }
    return output_dir;
}

std::uint64_t ExperimentConfig::content_hash() const { return hash64(to_json_string(), 0xc0f1); }

}  // namespace loam
