#include <cstdio>
#include <map>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/records.hpp"
#include "sgbench/pipeline/run.hpp"

namespace sgbench::pipeline {
namespace {

using nlohmann::json;

std::string num(const json& v, const char* format = "%.4g") {
  if (v.is_null()) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v.get<double>());
  return buf;
}

std::string estimate(const json& b) {
  if (b.is_null()) return "null";
  return num(b.at("estimate")) + " [" + num(b.at("ci_low")) + ", " + num(b.at("ci_high")) + "]";
}

std::string metric_cell(const json& group, const char* metric) {
  return estimate(group.at("metrics").at(metric).at("mean"));
}

void group_table(std::string& out, const json& groups, bool calibration,
                 const std::string& regime_filter) {
  out += "| system | regime | model | n | one-step | rollout AUC | rollout final | SG seen | SG unseen | rho |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& g : groups) {
    if (g.at("calibration").get<bool>() != calibration) continue;
    if (!regime_filter.empty() && g.at("regime") != regime_filter) continue;
    out += "| " + g.at("system").get<std::string>() + " | " + g.at("regime").get<std::string>() +
           " | " + g.at("family").get<std::string>() + "-" + g.at("variant").get<std::string>() +
           " | " + std::to_string(g.at("n_complete").get<std::size_t>()) + "/" +
           std::to_string(g.at("n_records").get<std::size_t>()) + " | " +
           metric_cell(g, "one_step") + " | " + metric_cell(g, "rollout_auc") + " | " +
           metric_cell(g, "rollout_final") + " | " + metric_cell(g, "sg_seen") + " | " +
           metric_cell(g, "sg_unseen") + " | " + num(g.at("rho"), "%.3f") + " |\n";
  }
}

}  // namespace

StageOutcome run_report(const std::filesystem::path& run_dir, const StageOptions& options) {
  (void)options;
  auto run = open_run(run_dir);
  const auto& layout = run.layout;
  const auto summary_path = layout.analysis_dir() / "summary.json";
  require(std::filesystem::exists(summary_path), ErrorKind::Io,
          "report: no analysis/summary.json; run analyze first");
  const json summary = read_json_file(summary_path);
  const auto& m = run.manifest;

  std::string out;
  out += "# sgbench report `" + m.run_id + "`\n\n";
  out += "- config hash: `" + m.config_hash + "`\n";
  out += "- tool version: `" + m.tool_version + "`\n";
  out += "- run started: " + m.started + "\n";
  out += "- diagnostic records: " + std::to_string(summary.at("n_records").get<std::size_t>()) +
         " (" + std::to_string(summary.at("n_complete").get<std::size_t>()) + " complete)\n\n";

  out += "## Directional checks\n\n";
  const auto& pooled = summary.at("pooled_association");
  if (pooled.is_null()) {
    out += "- Association (rho > 0, CI excludes 0): FAILED, pooled Spearman correlation undefined\n";
  } else {
    const double rho = pooled.at("spearman_rho").get<double>();
    const double lo = pooled.at("ci_low").get<double>();
    const bool pass = rho > 0.0 && lo > 0.0;
    out += std::string("- Association (rho > 0, CI excludes 0): ") + (pass ? "PASSED" : "FAILED") +
           ", Spearman(sg_unseen, rollout_auc) = " + num(pooled.at("spearman_rho"), "%.4f") + " [" +
           num(pooled.at("ci_low"), "%.4f") + ", " + num(pooled.at("ci_high"), "%.4f") + "] over " +
           std::to_string(pooled.at("n_points").get<std::size_t>()) + " trajectories\n";
  }
  const auto& gap = summary.at("seen_unseen_gap");
  if (gap.at("mean").is_null()) {
    out += "- Composition shift (unseen SG > seen SG): FAILED, no complete records\n";
  } else {
    const bool pass = gap.at("mean").get<double>() > 0.0;
    out += std::string("- Composition shift (unseen SG > seen SG): ") + (pass ? "PASSED" : "FAILED") +
           ", mean gap " + num(gap.at("mean")) + ", CI " + estimate(gap.at("unseen_minus_seen")) + "\n";
  }
  for (const auto& c : summary.at("paired_differences")) {
    if (c.at("scope") != "all") continue;
    const auto& d = c.at("diff");
    std::string verdict = "no pairs";
    if (!d.is_null()) {
      const bool zero_inside = d.at("ci_low").get<double>() <= 0.0 && d.at("ci_high").get<double>() >= 0.0;
      verdict = zero_inside ? "CI contains zero" : "CI excludes zero";
    }
    out += "- Regularization effect on " + c.at("metric").get<std::string>() + " (" +
           c.at("direction").get<std::string>() + "): " + estimate(d) + ", " +
           std::to_string(c.at("n_pairs").get<std::size_t>()) + " pairs, " + verdict + "\n";
  }

  out += "\n## In-distribution results\n\nMeans with bootstrap confidence intervals.\n\n";
  group_table(out, summary.at("groups"), false, std::string(solver::to_string(solver::Regime::InDistribution)));
  out += "\n## All regimes\n\n";
  group_table(out, summary.at("groups"), false, "");
  out += "\n## Calibration rows\n\nIdentity and wrapped reference solver, evaluated with the same protocol.\n\n";
  group_table(out, summary.at("groups"), true, "");

  out += "\n## Paired differences\n\n";
  out += "| metric | scope | pairs | baseline mean | treated mean | difference | Wilcoxon p | Cohen's d |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : summary.at("paired_differences")) {
    const auto& w = c.at("wilcoxon");
    out += "| " + c.at("metric").get<std::string>() + " | " + c.at("scope").get<std::string>() + " | " +
           std::to_string(c.at("n_pairs").get<std::size_t>()) + " | " + num(c.at("mean_baseline")) +
           " | " + num(c.at("mean_treated")) + " | " + estimate(c.at("diff")) + " | " +
           (w.is_null() ? "null" : num(w.at("p_value"), "%.3g")) + " | " + num(c.at("cohens_d"), "%.3f") +
           " |\n";
  }

  out += "\n## Jobs\n\n";
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& job : m.jobs) ++counts[job.stage][std::string(to_string(job.status))];
  out += "| stage | ok | failed | skipped |\n|---|---|---|---|\n";
  for (const auto& [stage, c] : counts) {
    auto get = [&](const char* k) { return c.contains(k) ? c.at(k) : 0; };
    out += "| " + stage + " | " + std::to_string(get("ok")) + " | " + std::to_string(get("failed")) +
           " | " + std::to_string(get("skipped")) + " |\n";
  }
  bool any_problem = false;
  for (const auto& job : m.jobs) {
    if (job.status == JobStatus::Ok) continue;
    if (!any_problem) out += "\nJobs that did not complete:\n\n";
    any_problem = true;
    out += "- `" + job.id + "` " + std::string(to_string(job.status)) + ": " + job.message + "\n";
  }

  out += "\n## Flagged records\n\n";
  const auto& flagged = summary.at("flagged_records");
  if (flagged.empty()) {
    out += "None. Every sub-evaluation produced finite values.\n";
  } else {
    out += "| run | trajectory | reasons | still complete |\n|---|---|---|---|\n";
    for (const auto& f : flagged) {
      out += "| " + f.at("run_id").get<std::string>() + " | " +
             std::to_string(f.at("trajectory_id").get<std::size_t>()) + " | " +
             f.at("reasons").get<std::string>() + " | " + (f.at("complete").get<bool>() ? "yes" : "no") +
             " |\n";
    }
  }
  for (const auto& job : m.jobs) {
    if (job.stage != "evaluate" || job.status != JobStatus::Ok) continue;
    const auto& d = job.details;
    const std::size_t excluded = d.at("one_step").at("excluded").get<std::size_t>() +
                                 d.at("sg_seen").at("excluded").get<std::size_t>() +
                                 d.at("sg_unseen").at("excluded").get<std::size_t>();
    if (excluded == 0 && d.at("truncated_rollouts").get<std::size_t>() == 0) continue;
    out += "- `" + job.id + "`: " + std::to_string(excluded) + " non-finite sub-results excluded, " +
           std::to_string(d.at("truncated_rollouts").get<std::size_t>()) + " rollouts truncated\n";
  }

  out += "\n## Configuration\n\n```json\n" + to_json(run.config).dump(2) + "\n```\n";

  write_text_atomic(layout.report(), out);
  JobEntry job;
  job.id = "report";
  job.stage = "report";
  job.started = job.finished = utc_timestamp();
  job.artifacts.push_back(make_artifact(run_dir, layout.report(), ArtifactFormat::Markdown));
  ManifestWriter writer(run_dir, run.manifest);
  writer.record(std::move(job));
  writer.finalize();
  log::info("report written to " + layout.report().string());
  StageOutcome outcome;
  outcome.ok = 1;
  return outcome;
}

}  // namespace sgbench::pipeline
