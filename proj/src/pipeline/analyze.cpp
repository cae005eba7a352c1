#include "sgbench/pipeline/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/run.hpp"
#include "sgbench/stats/ranks.hpp"

namespace sgbench::pipeline {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bootstrap_json(const std::optional<stats::BootstrapResult>& b) {
  if (!b) return nullptr;
  return {{"estimate", number_or_null(b->point_estimate)},
          {"ci_low", number_or_null(b->ci_low)},
          {"ci_high", number_or_null(b->ci_high)},
          {"n_resamples", b->n_resamples},
          {"seed", b->seed}};
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<stats::BootstrapResult> mean_ci(const std::vector<double>& values,
                                              const AnalysisSettings& s) {
  if (values.size() < 2) return std::nullopt;
  return stats::bootstrap_mean_ci(values, s.n_resamples, s.level, s.seed);
}

using GroupKey = std::tuple<std::string, std::string, std::string, std::string>;
using PairKey = std::tuple<std::string, std::string, std::uint64_t, std::string, std::size_t>;

struct Matched {
  const diagnostics::DiagnosticRecord* baseline = nullptr;
  const diagnostics::DiagnosticRecord* treated = nullptr;
};

PairedComparison compare(const std::string& metric, const std::string& scope,
                         const std::vector<const Matched*>& pairs, const AnalysisSettings& s) {
  PairedComparison c;
  c.metric = metric;
  c.scope = scope;
  std::vector<double> a, b, d;
  for (const auto* m : pairs) {
    a.push_back(metric_value(*m->baseline, metric));
    b.push_back(metric_value(*m->treated, metric));
    d.push_back(a.back() - b.back());
  }
  c.n_pairs = a.size();
  if (c.n_pairs == 0) return c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.mean_baseline += a[i];
    c.mean_treated += b[i];
  }
  c.mean_baseline /= static_cast<double>(a.size());
  c.mean_treated /= static_cast<double>(a.size());
  c.diff = stats::paired_bootstrap_diff(a, b, s.n_resamples, s.seed, s.level);
  c.wilcoxon = stats::wilcoxon_signed_rank(d);
  if (c.n_pairs >= 2) c.cohens_d = stats::cohens_d_paired(a, b);
  return c;
}

}  // namespace

double metric_value(const diagnostics::DiagnosticRecord& r, std::string_view metric) {
  if (metric == "one_step") return r.one_step;
  if (metric == "rollout_auc") return r.rollout_auc;
  if (metric == "rollout_final") return r.rollout_final;
  if (metric == "sg_seen") return r.sg_seen;
  if (metric == "sg_unseen") return r.sg_unseen;
  fail(ErrorKind::InvalidArgument, "unknown metric: " + std::string(metric));
}

const MetricSummary& GroupSummary::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.metric == name) return m;
  }
  fail(ErrorKind::InvalidArgument, "unknown metric: " + std::string(name));
}

AnalysisResult analyze_records(const std::vector<RecordRow>& rows, const AnalysisSettings& settings) {
  AnalysisResult result;
  result.n_records = rows.size();

  std::map<GroupKey, std::vector<const RecordRow*>> groups;
  std::map<PairKey, Matched> matched;
  std::vector<double> pooled_sg, pooled_auc, seen, unseen;
  for (const auto& row : rows) {
    const auto& k = row.key;
    groups[{k.system, k.regime, k.family, k.variant}].push_back(&row);
    if (row.record.flags != diagnostics::kFlagNone) result.flagged.push_back(row);
    if (!row.record.complete()) continue;
    ++result.n_complete;
    if (k.calibration()) continue;
    pooled_sg.push_back(row.record.sg_unseen);
    pooled_auc.push_back(row.record.rollout_auc);
    seen.push_back(row.record.sg_seen);
    unseen.push_back(row.record.sg_unseen);
    auto& m = matched[{k.system, k.family, k.seed, k.regime, row.record.trajectory_id}];
    if (k.variant == settings.baseline_variant) m.baseline = &row.record;
    if (k.variant == settings.treated_variant) m.treated = &row.record;
  }

  for (const auto& [key, members] : groups) {
    GroupSummary g;
    std::tie(g.system, g.regime, g.family, g.variant) = key;
    g.n_records = members.size();
    std::vector<const RecordRow*> complete;
    for (const auto* r : members) {
      if (r->record.complete()) complete.push_back(r);
    }
    g.n_complete = complete.size();
    for (const char* metric : kMetricNames) {
      std::vector<double> values;
      for (const auto* r : complete) values.push_back(metric_value(r->record, metric));
      g.metrics.push_back({metric, values.size(), mean_ci(values, settings)});
    }
    if (complete.size() >= 2) {
      std::vector<double> x, y;
      for (const auto* r : complete) {
        x.push_back(r->record.sg_unseen);
        y.push_back(r->record.rollout_auc);
      }
      g.rho = stats::spearman(x, y);
    }
    result.groups.push_back(std::move(g));
  }

  std::vector<const Matched*> all_pairs;
  std::map<std::pair<std::string, std::string>, std::vector<const Matched*>> by_model;
  for (const auto& [key, m] : matched) {
    if (m.baseline == nullptr || m.treated == nullptr) continue;
    all_pairs.push_back(&m);
    by_model[{std::get<0>(key), std::get<1>(key)}].push_back(&m);
  }
  for (const char* metric : {"sg_unseen", "rollout_auc"}) {
    result.paired.push_back(compare(metric, "all", all_pairs, settings));
    for (const auto& [model, pairs] : by_model) {
      result.paired.push_back(compare(metric, model.first + "/" + model.second, pairs, settings));
    }
  }

  result.pooled_points = pooled_sg.size();
  if (pooled_sg.size() >= 2) {
    result.pooled = stats::pooled_association(pooled_sg, pooled_auc, settings.n_resamples,
                                              settings.seed, settings.level);
  }
  if (!seen.empty()) {
    double gap = 0.0;
    for (std::size_t i = 0; i < seen.size(); ++i) gap += unseen[i] - seen[i];
    result.seen_unseen_gap = gap / static_cast<double>(seen.size());
    if (seen.size() >= 2) {
      result.seen_unseen_gap_ci =
          stats::paired_bootstrap_diff(unseen, seen, settings.n_resamples, settings.seed, settings.level);
    }
  }
  return result;
}

json summary_json(const AnalysisResult& r, const AnalysisSettings& settings) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    json metrics = json::object();
    for (const auto& m : g.metrics) metrics[m.metric] = {{"n", m.n}, {"mean", bootstrap_json(m.mean)}};
    groups.push_back({{"system", g.system},
                      {"regime", g.regime},
                      {"family", g.family},
                      {"variant", g.variant},
                      {"calibration", g.variant == kCalibrationVariant},
                      {"n_records", g.n_records},
                      {"n_complete", g.n_complete},
                      {"null", g.n_complete < 2},
                      {"metrics", metrics},
                      {"rho", optional_json(g.rho)}});
  }
  json paired = json::array();
  for (const auto& c : r.paired) {
    json w = nullptr;
    if (c.wilcoxon) {
      w = {{"statistic", c.wilcoxon->statistic},
           {"p_value", c.wilcoxon->p_value},
           {"n", c.wilcoxon->n},
           {"exact", c.wilcoxon->exact}};
    }
    paired.push_back({{"metric", c.metric},
                      {"scope", c.scope},
                      {"direction", settings.baseline_variant + "_minus_" + settings.treated_variant},
                      {"pairing", "system,family,seed,regime,trajectory_id"},
                      {"n_pairs", c.n_pairs},
                      {"mean_baseline", number_or_null(c.mean_baseline)},
                      {"mean_treated", number_or_null(c.mean_treated)},
                      {"diff", bootstrap_json(c.diff)},
                      {"wilcoxon", w},
                      {"cohens_d", optional_json(c.cohens_d)}});
  }
  json pooled = nullptr;
  if (r.pooled) {
    pooled = {{"spearman_rho", r.pooled->spearman_rho},
              {"ci_low", r.pooled->rho_ci_low},
              {"ci_high", r.pooled->rho_ci_high},
              {"n_points", r.pooled->n_points},
              {"n_resamples", r.pooled->n_resamples},
              {"degenerate_resamples", r.pooled->degenerate_resamples},
              {"seed", r.pooled->seed},
              {"x", "sg_unseen"},
              {"y", "rollout_auc"}};
  }
  json flagged = json::array();
  for (const auto& row : r.flagged) {
    flagged.push_back({{"run_id", row.key.run_id()},
                       {"trajectory_id", row.record.trajectory_id},
                       {"flags", row.record.flags},
                       {"reasons", diagnostics::describe_flags(row.record.flags)},
                       {"complete", row.record.complete()}});
  }
  return {{"settings",
           {{"n_resamples", settings.n_resamples},
            {"level", settings.level},
            {"seed", settings.seed},
            {"baseline_variant", settings.baseline_variant},
            {"treated_variant", settings.treated_variant}}},
          {"n_records", r.n_records},
          {"n_complete", r.n_complete},
          {"groups", groups},
          {"paired_differences", paired},
          {"pooled_association", pooled},
          {"pooled_points", r.pooled_points},
          {"seen_unseen_gap",
           {{"mean", optional_json(r.seen_unseen_gap)}, {"unseen_minus_seen", bootstrap_json(r.seen_unseen_gap_ci)}}},
          {"flagged_records", flagged}};
}

std::string summary_csv(const AnalysisResult& r) {
  std::string out = "system,model,one_step,rollout,sg_unseen,rho\r\n";
  for (const auto& g : r.groups) {
    if (g.regime != solver::to_string(solver::Regime::InDistribution) || g.variant == kCalibrationVariant) {
      continue;
    }
    auto mean_of = [&](const char* metric) {
      const auto& m = g.metric(metric);
      return m.mean ? fmt(m.mean->point_estimate) : std::string();
    };
    out += g.system + "," + g.family + "-" + g.variant + "," + mean_of("one_step") + "," +
           mean_of("rollout_auc") + "," + mean_of("sg_unseen") + "," + (g.rho ? fmt(*g.rho) : "") +
           "\r\n";
  }
  return out;
}

std::string scatter_csv(const std::vector<RecordRow>& rows) {
  std::string out = "run_id,system,family,variant,regime,trajectory_id,sg_unseen,rollout_auc\r\n";
  for (const auto& row : rows) {
    if (row.key.calibration() || !row.record.complete()) continue;
    const auto& k = row.key;
    out += k.run_id() + "," + k.system + "," + k.family + "," + k.variant + "," + k.regime + "," +
           std::to_string(row.record.trajectory_id) + "," + fmt(row.record.sg_unseen) + "," +
           fmt(row.record.rollout_auc) + "\r\n";
  }
  return out;
}

std::string seen_unseen_csv(const AnalysisResult& r) {
  std::string out = "system,regime,family,variant,n,sg_seen,sg_unseen\r\n";
  for (const auto& g : r.groups) {
    const auto& s = g.metric("sg_seen");
    const auto& u = g.metric("sg_unseen");
    out += g.system + "," + g.regime + "," + g.family + "," + g.variant + "," +
           std::to_string(g.n_complete) + "," + (s.mean ? fmt(s.mean->point_estimate) : "") + "," +
           (u.mean ? fmt(u.mean->point_estimate) : "") + "\r\n";
  }
  return out;
}

StageOutcome run_analyze(const std::filesystem::path& run_dir, const StageOptions& options) {
  (void)options;
  auto run = open_run(run_dir);
  const auto& layout = run.layout;
  const auto& config = run.config;

  std::vector<const JobEntry*> eval_jobs;
  for (const auto& job : run.manifest.jobs) {
    if (job.stage == "evaluate" && job.status == JobStatus::Ok) eval_jobs.push_back(&job);
  }
  std::sort(eval_jobs.begin(), eval_jobs.end(),
            [](const JobEntry* a, const JobEntry* b) { return a->id < b->id; });
  std::vector<RecordRow> rows;
  for (const auto* job : eval_jobs) {
    for (const auto& a : job->artifacts) {
      if (a.format != ArtifactFormat::RecordsCsv) continue;
      check_artifact(run_dir, a);
      auto part = read_records_csv(run_dir / a.path);
      rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  }
  require(!rows.empty(), ErrorKind::Io, "analyze: no diagnostic records; run evaluate first");

  AnalysisSettings settings;
  settings.n_resamples = config.analysis.n_resamples;
  settings.level = config.analysis.level;
  settings.seed = config.analysis.seed;
  for (const auto& v : config.variants) {
    if (v.lambda_sg == 0.0) {
      settings.baseline_variant = v.name;
      break;
    }
  }
  for (const auto& v : config.variants) {
    if (v.lambda_sg > 0.0) {
      settings.treated_variant = v.name;
      break;
    }
  }

  JobEntry job;
  job.id = "analyze";
  job.stage = "analyze";
  job.started = utc_timestamp();
  const auto result = analyze_records(rows, settings);
  auto doc = summary_json(result, settings);
  doc["run_id"] = run.manifest.run_id;
  doc["config_hash"] = run.manifest.config_hash;
  doc["tool_version"] = run.manifest.tool_version;

  const auto summary_path = layout.analysis_dir() / "summary.json";
  const auto table_path = layout.analysis_dir() / "summary.csv";
  const auto scatter_path = layout.figures_dir() / "scatter_sg_vs_rollout.csv";
  const auto bars_path = layout.figures_dir() / "seen_unseen.csv";
  write_text_atomic(summary_path, doc.dump(2) + "\n");
  write_text_atomic(table_path, summary_csv(result));
  write_text_atomic(scatter_path, scatter_csv(rows));
  write_text_atomic(bars_path, seen_unseen_csv(result));
  job.artifacts = {make_artifact(run_dir, summary_path, ArtifactFormat::Json),
                   make_artifact(run_dir, table_path, ArtifactFormat::Csv),
                   make_artifact(run_dir, scatter_path, ArtifactFormat::Csv),
                   make_artifact(run_dir, bars_path, ArtifactFormat::Csv)};
  job.details = {{"records", result.n_records},
                 {"complete_records", result.n_complete},
                 {"flagged_records", result.flagged.size()}};
  job.status = JobStatus::Ok;
  job.finished = utc_timestamp();
  log::info("analyze: " + std::to_string(result.n_records) + " records");

  ManifestWriter writer(run_dir, run.manifest);
  writer.record(std::move(job));
  writer.finalize();
  StageOutcome outcome;
  outcome.ok = 1;
  return outcome;
}

}  // namespace sgbench::pipeline
