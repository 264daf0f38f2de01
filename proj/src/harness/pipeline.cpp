#include "loam/harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "loam/deviance/deviance.hpp"
#include "loam/plan/serialize.hpp"
#include "loam/rank/metrics.hpp"
#include "loam/util/csv.hpp"
#include "loam/util/errors.hpp"
#include "loam/util/stats.hpp"

namespace loam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Eigen::Vector4d mean_normalized_env(const ExecutionRecord& rec, const PlanEncoder& encoder) {
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (const auto& [stage, env] : rec.stage_envs) {
        sum += Eigen::Vector4d(env.cpu_idle, env.io_wait, encoder.normalize_load5(env.load5),
                               env.mem_usage);
    }
    return sum / static_cast<double>(rec.stage_envs.size());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config, bool resume)
    : config_(std::move(config)), resume_(resume), dir_(config_.resolved_output_dir()) {
    fs::create_directories(dir_);
    const std::string config_path = path("config.json");
    if (fs::exists(config_path)) {
        const ExperimentConfig stored = ExperimentConfig::load(config_path);
        if (stored.content_hash() != config_.content_hash()) {
            if (resume_) {
                throw ConfigError(
                    "Pipeline: artifact dir holds a different config; refusing to resume");
            }
            config_.save(config_path);
        }
    } else {
        config_.save(config_path);
    }
}

std::string Pipeline::path(const std::string& name) const {
    return (fs::path(dir_) / name).string();
}

bool Pipeline::artifacts_present(const std::vector<std::string>& names) const {
    for (const auto& n : names) {
        if (!fs::exists(path(n))) return false;
    }
    return true;
}

void Pipeline::ensure_world() {
    if (warehouse_) return;
    ProjectSpec spec = config_.project;
    spec.rng_seed = config_.seed_for("project");
    warehouse_ = std::make_unique<SyntheticWarehouse>(spec, config_.oracle, config_.environment);
}

void Pipeline::generate() {
    ensure_world();
    if (resume_ && artifacts_present({"repository.jsonl", "layout.json", "workload.json"})) {
        repository_ = read_repository_file(path("repository.jsonl"));
        layout_ = FeatureLayout::load(path("layout.json"));
        json jw = json::parse(std::ifstream(path("workload.json")));
        workload_.clear();
        for (const auto& q : jw.at("queries")) {
            Query query;
            query.query_id = q.at("query_id").get<std::string>();
            query.template_id = q.at("template_id").get<std::string>();
            query.submit_day = q.at("submit_day").get<std::int64_t>();
            for (const auto& [k, v] : q.at("parameters").items()) {
                query.parameters[k] = v.get<double>();
            }
            workload_.push_back(std::move(query));
        }
        // The project repository was already generated; replay the executions
        // against a scratch world so this process's counters and environment
        // stream do not diverge from a fresh run.
        GeneratedProject scratch = warehouse_->generate_project();
        (void)scratch;
        return;
    }

    GeneratedProject project = warehouse_->generate_project();
    workload_ = std::move(project.workload);
    repository_ = std::move(project.repository);
    write_repository_file(repository_, path("repository.jsonl"));

    json jw;
    jw["queries"] = json::array();
    for (const auto& q : workload_) {
        json qq;
        qq["query_id"] = q.query_id;
        qq["template_id"] = q.template_id;
        qq["submit_day"] = q.submit_day;
        qq["parameters"] = q.parameters;
        jw["queries"].push_back(std::move(qq));
    }
    write_text(path("workload.json"), jw.dump() + "\n");

    // Layout is fitted on the training window only.
    HistoricalRepository train_repo(repository_.schema_ref());
    std::size_t taken = 0;
    for (const auto& rec : repository_.records()) {
        if (rec.day < config_.split.train_days && taken < config_.training.max_training_queries) {
            train_repo.append(rec);
            ++taken;
        }
    }
    layout_ = fit_layout(train_repo, config_.hash_segments, config_.hash_segment_width,
                         config_.seed_for("hash"));
    layout_->save(path("layout.json"));
}

void Pipeline::ensure_generated() {
    if (!layout_ || repository_.empty()) generate();
}

void Pipeline::train_model() {
    ensure_generated();
    if (resume_ && artifacts_present({"loam_model.json", "representative_env.json"})) {
        model_ = TrainedModel::load_checked(path("loam_model.json"), *layout_);
        json je = json::parse(std::ifstream(path("representative_env.json")));
        RepresentativeEnvironment rep;
        rep.source = env_source_from_string(je.at("source").get<std::string>());
        for (int i = 0; i < 4; ++i) rep.values[i] = je.at("values")[static_cast<std::size_t>(i)].get<double>();
        rep_env_ = rep;
        return;
    }

    const PlanEncoder encoder(*layout_);

    // Corpus: labeled defaults from the training window, plus unexecuted
    // knob-generated candidates carrying only domain labels.
    TrainingCorpus corpus;
    std::vector<const ExecutionRecord*> train_records;
    for (const auto& rec : repository_.records()) {
        if (rec.day < config_.split.train_days &&
            train_records.size() < config_.training.max_training_queries) {
            train_records.push_back(&rec);
        }
    }
    if (train_records.empty()) throw ConfigError("train_model: no training-window records");

    std::map<std::string, const Query*> query_by_id;
    for (const auto& q : workload_) query_by_id[q.query_id] = &q;

    const std::size_t candidate_executions_before = warehouse_->executions(PlanKind::Candidate);

    for (const ExecutionRecord* rec : train_records) {
        corpus.defaults.push_back(encoder.encode_plan(rec->plan, &rec->stage_envs));
        corpus.log_costs.push_back(std::log(rec->cpu_cost));
    }

    // Candidate plans are never executed: they are encoded with the paired
    // default record's mean environment so the environment block cannot leak
    // the domain label.
    const bool need_candidates = config_.ablation != AblationMode::NoAdaptation;
    if (need_candidates) {
        for (const ExecutionRecord* rec : train_records) {
            if (corpus.candidates.size() >= config_.training.max_domain_candidates) break;
            const auto it = query_by_id.find(rec->query_id);
            if (it == query_by_id.end()) continue;
            const CandidateSet cands = generate_candidates(*warehouse_, *it->second,
                                                           config_.explorer.knobs,
                                                           config_.explorer.k_max);
            const Eigen::Vector4d env = mean_normalized_env(*rec, encoder);
            for (std::size_t i = 1; i < cands.plans.size(); ++i) {
                if (corpus.candidates.size() >= config_.training.max_domain_candidates) break;
                corpus.candidates.push_back(encoder.encode_plan_fixed_env(cands.plans[i], env));
            }
        }
    }

    TrainConfig tc;
    tc.lr0 = config_.training.lr0;
    tc.lr_decay = config_.training.lr_decay;
    tc.epochs = config_.training.epochs;
    tc.batch_size = config_.training.batch_size;
    tc.rng_seed = config_.seed_for("training");
    apply_ablation(config_.ablation, tc, corpus, *layout_);

    PredictorParams params(config_.predictor, layout_->feature_dim, config_.seed_for("init"));
    const std::vector<EpochStats> history = train(params, corpus, tc);

    if (warehouse_->executions(PlanKind::Candidate) != candidate_executions_before) {
        throw PreconditionError("train_model: candidate plans were executed during training");
    }

    model_ = TrainedModel(std::move(params), *layout_, config_.ablation, history);
    model_->save(path("loam_model.json"));

    std::string hist_csv = "epoch,loss_cost,loss_domain,loss_total,domain_accuracy,w_c,w_d,lambda,lr\n";
    for (const auto& e : history) {
        hist_csv += std::to_string(e.epoch) + "," + fmt_double(e.loss_cost) + "," +
                    fmt_double(e.loss_domain) + "," + fmt_double(e.loss_total) + "," +
                    fmt_double(e.domain_accuracy) + "," + fmt_double(e.w_c) + "," +
                    fmt_double(e.w_d) + "," + fmt_double(e.lambda) + "," + fmt_double(e.lr) + "\n";
    }
    write_text(path("loss_history.csv"), hist_csv);

    // Training repository view for e_r.
    HistoricalRepository train_repo(repository_.schema_ref());
    for (const ExecutionRecord* rec : train_records) train_repo.append(*rec);
    rep_env_ = build_representative_env(train_repo, config_.selection_source, encoder,
                                        warehouse_.get());
    json je;
    je["source"] = to_string(rep_env_->source);
    je["values"] = {rep_env_->values[0], rep_env_->values[1], rep_env_->values[2],
                    rep_env_->values[3]};
    write_text(path("representative_env.json"), je.dump() + "\n");

    const std::size_t n_dom = corpus.candidates.size();
    json jm;
    jm["n_train_records"] = corpus.defaults.size();
    jm["n_domain_candidates"] = n_dom;
    write_text(path("corpus_meta.json"), jm.dump() + "\n");
}

void Pipeline::ensure_trained() {
    if (!model_ || !rep_env_) train_model();
}

PipelineResult Pipeline::evaluate() {
    ensure_trained();
    const PlanEncoder encoder(*layout_);

    PipelineResult result;
    result.artifact_dir = dir_;

    std::vector<const Query*> test_queries;
    for (const auto& q : workload_) {
        if (q.submit_day >= config_.split.train_days &&
            q.submit_day < config_.split.train_days + config_.split.test_days) {
            test_queries.push_back(&q);
        }
    }

    Rng replay_rng(config_.seed_for("replay"));
    std::ofstream decisions(path("decisions.jsonl"));
    std::string fitted_csv = "query_id,candidate_index,mu,sigma,n_samples,mean_replay_cost\n";

    for (const Query* q : test_queries) {
        const CandidateSet cands =
            generate_candidates(*warehouse_, *q, config_.explorer.knobs, config_.explorer.k_max);
        if (cands.generation_seconds > config_.explorer.max_explore_seconds) {
            throw NumericError("evaluate: candidate generation exceeded the configured bound for " +
                               q->query_id);
        }

        const auto t0 = std::chrono::steady_clock::now();
        const SelectionResult sel = select_plan(*model_, encoder, cands.plans, *rep_env_);
        const double infer_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        decisions << decision_log_line(q->query_id, cands.plans, sel, *rep_env_) << '\n';

        // Ground truth: flighting replay of every candidate.
        std::vector<std::vector<double>> costs(cands.plans.size());
        std::vector<LogNormalDist> dists;
        std::vector<double> means;
        for (std::size_t i = 0; i < cands.plans.size(); ++i) {
            const auto recs =
                warehouse_->flighting_replay(cands.plans[i], config_.replay.runs_per_candidate,
                                             replay_rng);
            for (const auto& r : recs) costs[i].push_back(r.cpu_cost);
            const LogNormalDist d = fit_lognormal(costs[i]);
            dists.push_back(d);
            means.push_back(mean(costs[i]));
            fitted_csv += q->query_id + "," + std::to_string(i) + "," + fmt_double(d.mu) + "," +
                          fmt_double(d.sigma) + "," + std::to_string(d.n_samples_fit) + "," +
                          fmt_double(means.back()) + "\n";
        }

        PerQueryResult row;
        row.query_id = q->query_id;
        row.n_candidates = cands.plans.size();
        row.chosen_index = sel.chosen_index;
        row.predicted_cost_chosen = sel.predicted_costs[sel.chosen_index];
        row.cost_loam = means[sel.chosen_index];
        row.cost_default = means[0];
        row.cost_best = *std::min_element(means.begin(), means.end());
        row.explore_seconds = cands.generation_seconds;
        row.inference_seconds = infer_seconds;

        auto others_of = [&](std::size_t which) {
            std::vector<LogNormalDist> others;
            for (std::size_t i = 0; i < dists.size(); ++i) {
                if (i != which) others.push_back(dists[i]);
            }
            return others;
        };
        const std::size_t best_idx = static_cast<std::size_t>(
            std::min_element(means.begin(), means.end()) - means.begin());
        if (dists.size() > 1) {
            row.rel_dev_loam =
                expected_deviance(dists[sel.chosen_index], others_of(sel.chosen_index))
                    .relative_deviance;
            row.rel_dev_best = expected_deviance(dists[best_idx], others_of(best_idx)).relative_deviance;
            row.rel_dev_default = expected_deviance(dists[0], others_of(0)).relative_deviance;
        }
        result.per_query.push_back(std::move(row));
    }

    write_text(path("fitted_candidates.csv"), fitted_csv);

    // Per-query metrics.
    std::string pq_csv =
        "query_id,n_candidates,chosen_index,cost_loam,cost_default,cost_best,"
        "rel_dev_loam,rel_dev_best,rel_dev_default,predicted_cost_chosen\n";
    std::string timing_csv = "query_id,explore_seconds,inference_seconds\n";
    for (const auto& r : result.per_query) {
        pq_csv += r.query_id + "," + std::to_string(r.n_candidates) + "," +
                  std::to_string(r.chosen_index) + "," + fmt_double(r.cost_loam) + "," +
                  fmt_double(r.cost_default) + "," + fmt_double(r.cost_best) + "," +
                  fmt_double(r.rel_dev_loam) + "," + fmt_double(r.rel_dev_best) + "," +
                  fmt_double(r.rel_dev_default) + "," + fmt_double(r.predicted_cost_chosen) + "\n";
        timing_csv += r.query_id + "," + fmt_double(r.explore_seconds) + "," +
                      fmt_double(r.inference_seconds) + "\n";
    }
    write_text(path("per_query.csv"), pq_csv);
    write_text(path("timings.csv"), timing_csv);

    // Sorted cost deltas, slowdown -> speedup.
    std::vector<std::pair<double, std::string>> deltas;
    for (const auto& r : result.per_query) {
        deltas.emplace_back(r.cost_default - r.cost_loam, r.query_id);
    }
    std::sort(deltas.begin(), deltas.end());
    std::string delta_csv = "query_id,cost_default_minus_loam\n";
    for (const auto& [d, id] : deltas) delta_csv += id + "," + fmt_double(d) + "\n";
    write_text(path("per_query_deltas.csv"), delta_csv);

    std::string dev_csv = "query_id,rel_dev_loam,rel_dev_best,rel_dev_default\n";
    for (const auto& r : result.per_query) {
        dev_csv += r.query_id + "," + fmt_double(r.rel_dev_loam) + "," + fmt_double(r.rel_dev_best) +
                   "," + fmt_double(r.rel_dev_default) + "\n";
    }
    write_text(path("relative_deviance.csv"), dev_csv);

    // Summary.
    PipelineSummary& s = result.summary;
    s.n_test_queries = result.per_query.size();
    if (fs::exists(path("corpus_meta.json"))) {
        json jm = json::parse(std::ifstream(path("corpus_meta.json")));
        s.n_train_records = jm.value("n_train_records", std::size_t{0});
        s.n_domain_candidates = jm.value("n_domain_candidates", std::size_t{0});
    }
    for (const auto& r : result.per_query) {
        s.mean_cost_loam += r.cost_loam;
        s.mean_cost_default += r.cost_default;
        s.mean_cost_best += r.cost_best;
        s.mean_rel_dev_loam += r.rel_dev_loam;
        s.mean_rel_dev_best += r.rel_dev_best;
        s.mean_rel_dev_default += r.rel_dev_default;
        if (r.cost_loam < r.cost_default) {
            ++s.speedups;
        } else if (r.cost_loam > r.cost_default) {
            ++s.slowdowns;
        } else {
            ++s.ties;
        }
    }
    if (!result.per_query.empty()) {
        const double n = static_cast<double>(result.per_query.size());
        s.mean_cost_loam /= n;
        s.mean_cost_default /= n;
        s.mean_cost_best /= n;
        s.mean_rel_dev_loam /= n;
        s.mean_rel_dev_best /= n;
        s.mean_rel_dev_default /= n;
    }

    std::string sum_csv =
        "n_train_records,n_domain_candidates,n_test_queries,speedups,slowdowns,ties,"
        "mean_cost_loam,mean_cost_default,mean_cost_best,"
        "mean_rel_dev_loam,mean_rel_dev_best,mean_rel_dev_default,ablation,selection_source,seed\n";
    sum_csv += std::to_string(s.n_train_records) + "," + std::to_string(s.n_domain_candidates) +
               "," + std::to_string(s.n_test_queries) + "," + std::to_string(s.speedups) + "," +
               std::to_string(s.slowdowns) + "," + std::to_string(s.ties) + "," +
               fmt_double(s.mean_cost_loam) + "," + fmt_double(s.mean_cost_default) + "," +
               fmt_double(s.mean_cost_best) + "," + fmt_double(s.mean_rel_dev_loam) + "," +
               fmt_double(s.mean_rel_dev_best) + "," + fmt_double(s.mean_rel_dev_default) + "," +
               to_string(config_.ablation) + "," + to_string(config_.selection_source) + "," +
               std::to_string(config_.seed) + "\n";
    write_text(path("summary.csv"), sum_csv);

    return result;
}

PipelineResult Pipeline::run() {
    generate();
    train_model();
    PipelineResult result = evaluate();

    // Optional training-size sweep on the same test candidates.
    if (!config_.training_size_sweep.empty()) {
        std::string sweep_csv = "train_size,mean_cost_loam,mean_rel_dev_loam\n";
        for (const std::size_t size : config_.training_size_sweep) {
            ExperimentConfig sub = config_;
            sub.training.max_training_queries = size;
            sub.training_size_sweep.clear();
            sub.output_dir = config_.output_dir + "/sweep_" + std::to_string(size);
            Pipeline p(sub);
            const PipelineResult r = p.run();
            sweep_csv += std::to_string(size) + "," + fmt_double(r.summary.mean_cost_loam) + "," +
                         fmt_double(r.summary.mean_rel_dev_loam) + "\n";
        }
        write_text(path("training_size_sweep.csv"), sweep_csv);
    }
    return result;
}

PipelineResult run_pipeline(const ExperimentConfig& config, bool resume) {
    Pipeline p(config, resume);
    return p.run();
}

SelectProjectsResult run_select_projects(const ExperimentConfig& config) {
    const auto& ps = config.project_selection;
    const std::string dir = config.resolved_output_dir();
    fs::create_directories(dir);

    struct ProjectData {
        std::string id;
        WorkloadStats stats;
        FilterDecision verdict;
        std::vector<PlanSignature> signatures;
        std::vector<double> labels;  // true D(M_d) per sampled query
    };

    auto build_project = [&](const std::string& id, std::uint64_t seed,
                             double misestimation) -> ProjectData {
        ProjectSpec spec = config.project;
        spec.project_id = id;
        spec.rng_seed = seed;
        spec.planner_misestimation = misestimation;
        // Cohort heterogeneity: projects differ in join topology (table
        // counts per template) the way real projects differ in workload
        // characteristics; deeper joins leave more reorder headroom.
        {
            Rng shape_rng(derive_seed(seed, "selector_shape"));
            spec.template_tables_min = 2 + static_cast<int>(shape_rng.uniform_index(3));
            spec.template_tables_max =
                std::min(spec.n_tables,
                         spec.template_tables_min + 1 + static_cast<int>(shape_rng.uniform_index(3)));
        }
        SyntheticWarehouse warehouse(spec, config.oracle, config.environment);
        const std::vector<Query> workload = warehouse.generate_workload();

        ProjectData data;
        data.id = id;
        data.stats = compute_stats(
            workload, spec.n_days,
            [&](const Query& q) {
                const QueryTemplate& t = warehouse.template_by_id(q.template_id);
                return t.table_ids;
            },
            [&](const std::string& table) { return warehouse.schema().table(table).lifespan_days; },
            ps.thresholds.lifespan_floor_days);
        data.verdict = apply_filter(data.stats, ps.thresholds);

        Rng replay_rng(derive_seed(seed, "selector_replay"));
        const std::size_t n_queries = std::min(ps.queries_per_project, workload.size());
        for (std::size_t qi = 0; qi < n_queries; ++qi) {
            const Query& q = workload[qi];
            const CandidateSet cands =
                generate_candidates(warehouse, q, config.explorer.knobs, config.explorer.k_max);
            std::vector<std::vector<double>> costs(cands.plans.size());
            for (std::size_t i = 0; i < cands.plans.size(); ++i) {
                const auto recs = warehouse.flighting_replay(cands.plans[i],
                                                             ps.replays_per_candidate, replay_rng);
                for (const auto& r : recs) costs[i].push_back(r.cpu_cost);
            }
            const DevianceReport improvement = improvement_space(costs);
            // Relative form: comparable across projects whose cost scales
            // differ by orders of magnitude, and it keeps 2^rel in range for
            // the NDCG gains.
            data.labels.push_back(improvement.relative_deviance);
            data.signatures.push_back(make_signature(
                cands.plans[0],
                [&](const std::string& table) { return warehouse.schema().table(table).n_rows; },
                mean(costs[0])));
        }
        return data;
    };

    // Planted spread of improvement space via the planner's misestimation.
    auto misestimation_for = [&](std::uint64_t index, bool eval_cohort) {
        Rng rng(config.seed_for(eval_cohort ? "sel_alpha_eval" : "sel_alpha_train", index));
        return rng.uniform(ps.misestimation_lo, ps.misestimation_hi);
    };

    std::vector<ProjectData> train_projects;
    for (int i = 0; i < ps.n_train_projects; ++i) {
        train_projects.push_back(build_project("train_p" + std::to_string(i),
                                               config.seed_for("sel_proj_train", static_cast<std::uint64_t>(i)),
                                               misestimation_for(static_cast<std::uint64_t>(i), false)));
    }
    std::vector<ProjectData> eval_projects;
    for (int i = 0; i < ps.n_eval_projects; ++i) {
        eval_projects.push_back(build_project("eval_p" + std::to_string(i),
                                              config.seed_for("sel_proj_eval", static_cast<std::uint64_t>(i)),
                                              misestimation_for(static_cast<std::uint64_t>(i), true)));
    }

    std::vector<PlanSignature> train_sigs;
    std::vector<double> train_labels;
    for (const auto& p : train_projects) {
        train_sigs.insert(train_sigs.end(), p.signatures.begin(), p.signatures.end());
        train_labels.insert(train_labels.end(), p.labels.begin(), p.labels.end());
    }
    GbdtConfig gbdt = ps.gbdt;
    gbdt.rng_seed = config.seed_for("ranker");
    const RankerModel ranker =
        RankerModel::train(train_sigs, train_labels, ps.n_train_projects, gbdt);

    std::vector<ProjectWorkloadSample> eval_samples;
    std::vector<double> truth;
    for (const auto& p : eval_projects) {
        eval_samples.push_back({p.id, p.signatures});
        truth.push_back(p.labels.empty() ? 0.0 : mean(p.labels));
    }
    const std::vector<ProjectRankEntry> ranking = rank_projects(ranker, eval_samples);

    SelectProjectsResult out;
    out.ranking = ranking;
    out.truth_by_project = truth;

    // Ranking table with per-rule verdicts.
    std::string rank_csv =
        "rank,project_id,mean_estimated_improvement,true_mean_improvement,r1_pass,r2_pass,r3_pass,"
        "filter_pass\n";
    std::map<std::string, const ProjectData*> by_id;
    for (const auto& p : eval_projects) by_id[p.id] = &p;
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < eval_projects.size(); ++i) index_of[eval_projects[i].id] = i;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        const ProjectData& p = *by_id.at(ranking[r].project_id);
        rank_csv += std::to_string(r + 1) + "," + p.id + "," +
                    fmt_double(ranking[r].mean_estimated_improvement) + "," +
                    fmt_double(truth[index_of.at(p.id)]) + "," +
                    (p.verdict.r1_pass ? "1" : "0") + "," + (p.verdict.r2_pass ? "1" : "0") + "," +
                    (p.verdict.r3_pass ? "1" : "0") + "," + (p.verdict.pass ? "1" : "0") + "\n";
    }
    out.ranking_csv = (fs::path(dir) / "project_ranking.csv").string();
    write_text(out.ranking_csv, rank_csv);

    std::string top_txt;
    for (std::size_t r = 0; r < std::min(ps.top_n, ranking.size()); ++r) {
        top_txt += ranking[r].project_id + "\n";
    }
    out.top_n_file = (fs::path(dir) / "top_projects.txt").string();
    write_text(out.top_n_file, top_txt);

    // Ranker quality vs the closed-form random baseline (n = k).
    std::vector<std::size_t> ranked_indices;
    for (const auto& e : ranking) ranked_indices.push_back(index_of.at(e.project_id));
    std::string metrics_csv = "k,recall_ranker,recall_random,ndcg_ranker,ndcg_random,rel_clip\n";
    for (std::size_t k = 1; k <= std::min<std::size_t>(5, ranking.size()); ++k) {
        const double rec = recall_at(ranked_indices, truth, k, k);
        const double ndcg = ndcg_at(ranked_indices, truth, k, ps.rel_clip);
        const RandomBaselines base = random_baselines(truth, k, k, ps.rel_clip);
        metrics_csv += std::to_string(k) + "," + fmt_double(rec) + "," +
                       fmt_double(base.expected_recall) + "," + fmt_double(ndcg) + "," +
                       fmt_double(base.expected_ndcg) + "," + fmt_double(ps.rel_clip) + "\n";
    }
    out.metrics_csv = (fs::path(dir) / "ranker_metrics.csv").string();
    write_text(out.metrics_csv, metrics_csv);

    return out;
}

}  // namespace loam
