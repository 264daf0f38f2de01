#include "loam/harness/report.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "loam/deviance/deviance.hpp"
#include "loam/util/csv.hpp"
#include "loam/util/errors.hpp"

namespace loam {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("report: cannot read " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

int column_of(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    throw DataError("report: missing column " + name);
}

}  // namespace

ReportResult write_report(const std::string& artifact_dir, std::size_t theorem_instances,
                          std::size_t theorem_draws, std::uint64_t theorem_seed) {
    std::vector<std::string> missing;
    for (const char* name : {"per_query.csv", "summary.csv", "fitted_candidates.csv"}) {
        if (!fs::exists(fs::path(artifact_dir) / name)) missing.emplace_back(name);
    }
    if (!missing.empty()) {
        std::string msg = "report: missing inputs in " + artifact_dir + ":";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }

    ReportResult result;
    const auto pq = read_csv((fs::path(artifact_dir) / "per_query.csv").string());
    std::ostringstream text;
    text << "LOAM experiment report\n";
    text << "======================\n";
    text << "artifact dir: " << artifact_dir << "\n\n";

    if (pq.size() <= 1) {
        result.empty_test_set = true;
        text << "Test queries: none\n";
        text << "This configuration produced no test queries; nothing to score.\n";
    } else {
        const auto& header = pq.front();
        const int c_loam = column_of(header, "cost_loam");
        const int c_def = column_of(header, "cost_default");
        const int c_best = column_of(header, "cost_best");
        const int c_rdl = column_of(header, "rel_dev_loam");
        const int c_rdb = column_of(header, "rel_dev_best");
        const int c_rdd = column_of(header, "rel_dev_default");
        for (std::size_t i = 1; i < pq.size(); ++i) {
            const auto& row = pq[i];
            const double loam = std::stod(row[static_cast<std::size_t>(c_loam)]);
            const double def = std::stod(row[static_cast<std::size_t>(c_def)]);
            result.mean_cost_loam += loam;
            result.mean_cost_default += def;
            result.mean_cost_best += std::stod(row[static_cast<std::size_t>(c_best)]);
            result.mean_rel_dev_loam += std::stod(row[static_cast<std::size_t>(c_rdl)]);
            result.mean_rel_dev_best += std::stod(row[static_cast<std::size_t>(c_rdb)]);
            result.mean_rel_dev_default += std::stod(row[static_cast<std::size_t>(c_rdd)]);
            if (loam < def) ++result.speedups;
            if (loam > def) ++result.slowdowns;
            ++result.n_queries;
        }
        const double n = static_cast<double>(result.n_queries);
        result.mean_cost_loam /= n;
        result.mean_cost_default /= n;
        result.mean_cost_best /= n;
        result.mean_rel_dev_loam /= n;
        result.mean_rel_dev_best /= n;
        result.mean_rel_dev_default /= n;

        text << "Test queries: " << result.n_queries << "\n";
        text << "Mean CPU cost (selected):      " << fmt_double(result.mean_cost_loam) << "\n";
        text << "Mean CPU cost (default plan):  " << fmt_double(result.mean_cost_default) << "\n";
        text << "Mean CPU cost (best candidate):" << fmt_double(result.mean_cost_best) << "\n";
        text << "Speedups: " << result.speedups << "  Slowdowns: " << result.slowdowns << "\n\n";
        text << "Relative deviance (deviance / oracle expected cost)\n";
        text << "  selected plans:  " << fmt_double(result.mean_rel_dev_loam) << "\n";
        text << "  best-achievable: " << fmt_double(result.mean_rel_dev_best) << "\n";
        text << "  default plans:   " << fmt_double(result.mean_rel_dev_default) << "\n";
        text << "  (candidate cost distributions are fitted independently per plan;\n"
             << "   the analytic deviance assumes independence across candidates)\n\n";
    }

    // Theorem 1 battery on the fitted candidate distributions.
    const auto fitted = read_csv((fs::path(artifact_dir) / "fitted_candidates.csv").string());
    std::map<std::string, std::vector<LogNormalDist>> by_query;
    if (fitted.size() > 1) {
        const auto& header = fitted.front();
        const int c_q = column_of(header, "query_id");
        const int c_mu = column_of(header, "mu");
        const int c_sigma = column_of(header, "sigma");
        for (std::size_t i = 1; i < fitted.size(); ++i) {
            const auto& row = fitted[i];
            LogNormalDist d;
            d.mu = std::stod(row[static_cast<std::size_t>(c_mu)]);
            d.sigma = std::stod(row[static_cast<std::size_t>(c_sigma)]);
            if (d.sigma > 0.0) by_query[row[static_cast<std::size_t>(c_q)]].push_back(d);
        }
    }
    std::vector<std::vector<LogNormalDist>> instances;
    for (const auto& [q, dists] : by_query) {
        if (dists.size() >= 2 && instances.size() < theorem_instances) instances.push_back(dists);
    }

    std::string theorem_csv = "instance,policy,mean_deviance,std_error,ordering_ok\n";
    if (!instances.empty()) {
        const std::vector<SelectionPolicy> policies = {random_policy(), worst_expected_policy()};
        const Theorem1Report rep = theorem1_battery(instances, policies, theorem_draws, theorem_seed);
        text << "Theorem 1 battery (" << instances.size() << " instances, " << theorem_draws
             << " draws each)\n";
        text << "  policy ordering vs best-achievable: " << (rep.all_ok ? "holds" : "VIOLATED")
             << "\n\n";
        for (std::size_t i = 0; i < rep.instances.size(); ++i) {
            const auto& inst = rep.instances[i];
            theorem_csv += std::to_string(i) + ",best_expected," +
                           fmt_double(inst.best_expected.mean_deviance) + "," +
                           fmt_double(inst.best_expected.std_error) + ",1\n";
            for (std::size_t p = 0; p < rep.policy_names.size(); ++p) {
                theorem_csv += std::to_string(i) + "," + rep.policy_names[p] + "," +
                               fmt_double(inst.per_policy[p].mean_deviance) + "," +
                               fmt_double(inst.per_policy[p].std_error) + "," +
                               (inst.ordering_ok[p] ? "1" : "0") + "\n";
            }
        }
    } else {
        text << "Theorem 1 battery: no multi-candidate instances available\n\n";
    }
    result.theorem_csv_path = (fs::path(artifact_dir) / "theorem1.csv").string();
    std::ofstream tcsv(result.theorem_csv_path);
    tcsv << theorem_csv;

    // Ranker curves, when the selector has run in this directory.
    const auto ranker_path = fs::path(artifact_dir) / "ranker_metrics.csv";
    if (fs::exists(ranker_path)) {
        text << "Ranker quality (vs closed-form random baseline)\n";
        const auto rk = read_csv(ranker_path.string());
        for (std::size_t i = 0; i < rk.size(); ++i) {
            text << "  ";
            for (std::size_t j = 0; j < rk[i].size(); ++j) {
                text << rk[i][j] << (j + 1 < rk[i].size() ? "  " : "");
            }
            text << "\n";
        }
    } else {
        text << "Ranker metrics: not produced in this run (see select-projects)\n";
    }

    result.report_path = (fs::path(artifact_dir) / "report.txt").string();
    std::ofstream out(result.report_path);
    if (!out) throw DataError("report: cannot write " + result.report_path);
    out << text.str();
    return result;
}

}  // namespace loam
