// Runs acceptance criteria 1-9 and prints one PASS/FAIL line per criterion.
// Criteria 5-8 share one training grid with default hyperparameters.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "sgbench/core/log.hpp"
#include "sgbench/diagnostics/evaluate.hpp"
#include "sgbench/diagnostics/metrics.hpp"
#include "sgbench/diagnostics/reference_models.hpp"
#include "sgbench/pipeline/hashing.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/records.hpp"
#include "sgbench/pipeline/run.hpp"
#include "support/autodiff_suite.hpp"
#include "support/criteria.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sgbench;
namespace t = sgbench::testing;
using nlohmann::json;

constexpr double kOneStepEnvelope = 0.2;
constexpr double kMinRho = 0.3;
constexpr std::size_t kOverfitEpochs = 800;

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string le(double value, double tol) { return fmt("%.3e", value) + " <= " + fmt("%.0e", tol); }

// ---- criterion 1 ----------------------------------------------------------

Outcome solver_suite() {
  Outcome o;
  const solver::PdeSystem heat{solver::PdeKind::Heat, 0.05};
  const solver::PdeSystem burgers{solver::PdeKind::Burgers, 0.02};
  const double decay = t::heat_decay_error();
  o.check(decay <= t::kHeatDecayTol, "heat analytic decay " + le(decay, t::kHeatDecayTol));
  const double sg_heat = t::reference_semigroup_error(heat);
  o.check(sg_heat <= t::kHeatSemigroupTol, "heat reference semigroup " + le(sg_heat, t::kHeatSemigroupTol));
  const double sg_burgers = t::reference_semigroup_error(burgers);
  o.check(sg_burgers <= t::kBurgersSemigroupTol,
          "burgers reference semigroup " + le(sg_burgers, t::kBurgersSemigroupTol));
  const double conv = t::burgers_self_convergence();
  o.check(conv <= t::kSelfConvergenceTol, "burgers self-convergence " + le(conv, t::kSelfConvergenceTol));
  const double drift = std::max(t::mean_drift(heat), t::mean_drift(burgers));
  o.check(drift <= t::kMeanConservationTol, "mean conservation " + le(drift, t::kMeanConservationTol));
  return o;
}

// ---- criterion 2 ----------------------------------------------------------

Outcome autodiff_suite() {
  Outcome o;
  double worst_op = 0.0;
  std::size_t n_ops = 0;
  for (const auto& r : t::op_gradient_suite()) {
    ++n_ops;
    worst_op = std::max(worst_op, r.max_rel_error);
    const bool ok = r.max_rel_error <= t::kGradTol && r.nondegenerate && r.instances >= 5;
    if (!ok) o.check(false, "op " + r.name + " gradient " + le(r.max_rel_error, t::kGradTol));
  }
  o.check(worst_op <= t::kGradTol,
          std::to_string(n_ops) + " op checks x " + std::to_string(t::kGradInstances) + " instances, worst " +
              le(worst_op, t::kGradTol));
  for (auto family : {models::Family::TcConv, models::Family::Fno1d}) {
    const auto r = t::model_gradient_check(family);
    o.check(r.max_rel_error <= t::kGradTol && r.nondegenerate && r.instances >= 5,
            "model " + r.name + " x " + std::to_string(r.instances) + " instances " +
                le(r.max_rel_error, t::kGradTol));
  }
  const double spec = t::spectral_oracle_error();
  o.check(spec <= t::kSpectralOracleTol, "spectral conv vs DFT oracle " + le(spec, t::kSpectralOracleTol));
  const double conv = t::conv_oracle_error();
  o.check(conv <= t::kConvOracleTol, "periodic conv vs triple loop " + le(conv, t::kConvOracleTol));
  return o;
}

// ---- criterion 3 ----------------------------------------------------------

Outcome diagnostic_suite() {
  Outcome o;
  const solver::GridSpec grid;
  const solver::PdeSystem heat{solver::PdeKind::Heat, 0.05};
  const solver::PdeSystem burgers{solver::PdeKind::Burgers, 0.02};

  {
    const auto test = t::small_test_split(heat);
    const auto e = diagnostics::evaluate_model(diagnostics::IdentitySimulator{}, test,
                                               diagnostics::DiagConfig::grid_pairs(grid));
    const double sg = t::max_sg(e);
    const double auc = t::min_metric(e, &diagnostics::DiagnosticRecord::rollout_auc);
    o.check(sg == 0.0 && auc > 0.0,
            "identity on heat: max E_sg = " + fmt("%g", sg) + ", min rollout_auc = " + fmt("%.4f", auc));
  }
  {
    const auto additive = t::drift_model(1.0);
    const Field zero(grid.nx, 0.0);
    const auto pairs = diagnostics::DiagConfig::grid_pairs(grid);
    double at_zero = 0.0, smooth = 0.0;
    const Field u = solver::sample_initial_condition(solver::IcSpec{}, grid, 0);
    for (const auto* list : {&pairs.seen_pairs, &pairs.unseen_pairs}) {
      for (const auto& p : *list) {
        at_zero = std::max(at_zero, diagnostics::semigroup_error(additive, zero, p.s, p.t, 1e-8, grid.dx()));
        smooth = std::max(smooth, diagnostics::semigroup_error(additive, u, p.s, p.t, 1e-8, grid.dx()));
      }
    }
    const double dyadic = diagnostics::semigroup_error(additive, zero, 0.25, 0.5, 1e-8, grid.dx());
    o.check(dyadic == 0.0, "additive model at u = 0, (0.25, 0.5): E_sg = " + fmt("%g", dyadic));
    o.check(smooth <= 1e-15 && at_zero <= 1e-15,
            "additive model over all 190 grid pairs: max E_sg " + fmt("%.2e", std::max(smooth, at_zero)) +
                " (rounding of s c + t c)");
  }
  {
    const double q = t::quadratic_drift_error(0.0);
    o.check(std::abs(q - 0.48) <= 1e-10, "quadratic model at u = 0, (0.2, 0.3): E_sg = " + fmt("%.15f", q));
  }
  for (const auto& [system, floor] : {std::pair{heat, t::kHeatSemigroupTol}, std::pair{burgers, t::kBurgersSemigroupTol}}) {
    const auto test = t::small_test_split(system, 3);
    const auto e = diagnostics::evaluate_model(solver::ReferenceSimulator(system, test.grid), test,
                                               diagnostics::DiagConfig::grid_pairs(test.grid));
    const double worst = std::max({t::max_sg(e), t::max_metric(e, &diagnostics::DiagnosticRecord::one_step),
                                   t::max_metric(e, &diagnostics::DiagnosticRecord::rollout_auc),
                                   t::max_metric(e, &diagnostics::DiagnosticRecord::rollout_final)});
    o.check(worst <= floor, std::string("wrapped solver on ") + std::string(solver::to_string(system.kind)) +
                                ": all diagnostics " + le(worst, floor));
  }
  {
    auto m = t::randomized_model(models::ModelConfig::fno1d(), 3, 0.05);
    const solver::ReferenceSimulator ref(burgers, grid);
    const auto quad = t::drift_model(2.0);
    const Simulator* sims[] = {&m, &ref, &quad};
    const Field u = solver::sample_initial_condition(solver::IcSpec{}, grid, 1);
    std::size_t checked = 0, mismatched = 0;
    for (const auto* sim : sims) {
      const auto family = diagnostics::autonomous_family(*sim);
      for (const auto& [r, s, tt] : {std::tuple{0.0, 0.25, 0.5}, std::tuple{0.125, 0.375, 0.75},
                                     std::tuple{0.25, 0.5, 1.0}, std::tuple{0.0625, 0.5, 0.875}}) {
        const double e1 = diagnostics::evolution_family_error(family, u, r, s, tt, 1e-8, grid.dx());
        const double e2 = diagnostics::semigroup_error(*sim, u, s - r, tt - s, 1e-8, grid.dx());
        ++checked;
        mismatched += std::bit_cast<std::uint64_t>(e1) != std::bit_cast<std::uint64_t>(e2);
      }
    }
    o.check(mismatched == 0, "evolution-family reduction bit-exact on " + std::to_string(checked) +
                                 " (model, r, s, t) cases, " + std::to_string(mismatched) + " mismatches");
  }
  return o;
}

// ---- criterion 4 ----------------------------------------------------------

Outcome stats_suite() {
  Outcome o;
  const double rho = t::spearman_hand_case();
  o.check(std::abs(rho - 0.8) <= t::kStatsTol, "spearman hand case rho = " + fmt("%.15f", rho));
  const double p = t::wilcoxon_hand_case();
  o.check(std::abs(p - 0.0625) <= t::kStatsTol, "wilcoxon exact p = " + fmt("%.15f", p));
  const double d = t::cohens_d_hand_case();
  o.check(std::abs(d - std::sqrt(2.0)) <= t::kStatsTol, "cohen's d = " + fmt("%.15f", d));

  constexpr std::size_t n = 2000;
  const auto b = t::two_point_bootstrap(0.0, 1.0, n, 7);
  const bool freqs = !b.other_value && std::abs(b.freq_low - 0.25) <= t::frequency_tolerance(0.25, n) &&
                     std::abs(b.freq_mid - 0.5) <= t::frequency_tolerance(0.5, n) &&
                     std::abs(b.freq_high - 0.25) <= t::frequency_tolerance(0.25, n);
  o.check(freqs && b.ci.ci_low == 0.0 && b.ci.ci_high == 1.0,
          "two-point bootstrap: means only {0, 0.5, 1} at " + fmt("%.3f", b.freq_low) + "/" +
              fmt("%.3f", b.freq_mid) + "/" + fmt("%.3f", b.freq_high) + ", CI [" + fmt("%g", b.ci.ci_low) +
              ", " + fmt("%g", b.ci.ci_high) + "]");
  const double pa[] = {1.0, 0.0}, pb[] = {0.0, 1.0};
  const auto paired = stats::paired_bootstrap_diff(pa, pb, n, 3);
  o.check(paired.ci_low == -1.0 && paired.ci_high == 1.0 && paired.point_estimate == 0.0,
          "paired two-point bootstrap CI [" + fmt("%g", paired.ci_low) + ", " + fmt("%g", paired.ci_high) + "]");

  std::vector<double> x(50), y(50);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n01(rng);
    y[i] = x[i] + n01(rng);
  }
  const auto r1 = stats::bootstrap_mean_ci(x, n, 0.95, 11), r2 = stats::bootstrap_mean_ci(x, n, 0.95, 11);
  const auto a1 = stats::pooled_association(x, y, n, 12).value();
  const auto a2 = stats::pooled_association(x, y, n, 12).value();
  o.check(r1.ci_low == r2.ci_low && r1.ci_high == r2.ci_high && a1.rho_ci_low == a2.rho_ci_low &&
              a1.rho_ci_high == a2.rho_ci_high,
          "bootstrap and association CIs identical under a fixed seed");
  return o;
}

// ---- criteria 5-8: the training grid ---------------------------------------

struct Grid {
  fs::path dir;
  pipeline::ExperimentConfig config;
  bool ran = false;
  std::string error;
  json summary;
  std::vector<pipeline::RecordRow> rows;
  double seconds = 0.0;
  std::size_t trained = 0, resumed = 0;
};

Grid run_grid(const fs::path& dir, std::size_t seeds, std::size_t jobs, bool fresh) {
  Grid g;
  g.dir = dir;
  g.config = pipeline::ExperimentConfig::defaults();
  g.config.name = "acceptance";
  g.config.n_seeds = seeds;
  const auto start = std::chrono::steady_clock::now();
  try {
    pipeline::StageOptions opts;
    opts.jobs = jobs;
    const pipeline::RunLayout layout{dir};
    bool reuse = false;
    if (!fresh && fs::exists(layout.config()) && pipeline::load_manifest(dir)) {
      reuse = pipeline::config_hash(pipeline::load_config(layout.config())) == pipeline::config_hash(g.config);
    }
    if (!reuse) {
      pipeline::StageOptions gen = opts;
      gen.force = true;
      if (!pipeline::run_generate(g.config, dir, gen).success()) throw std::runtime_error("generate failed");
    }
    const auto train = pipeline::run_train(dir, opts);
    g.trained = train.ok;
    g.resumed = train.skipped;
    if (!train.success()) throw std::runtime_error("training jobs failed");
    if (!pipeline::run_evaluate(dir, opts).success()) throw std::runtime_error("evaluate failed");
    pipeline::run_analyze(dir, opts);
    pipeline::run_report(dir, opts);
    g.summary = pipeline::read_json_file(layout.analysis_dir() / "summary.json");
    const auto manifest = pipeline::load_manifest(dir).value();
    for (const auto& job : manifest.jobs) {
      if (job.stage != "evaluate" || job.status != pipeline::JobStatus::Ok) continue;
      for (const auto& a : job.artifacts) {
        if (a.format != pipeline::ArtifactFormat::RecordsCsv) continue;
        auto part = pipeline::read_records_csv(dir / a.path);
        g.rows.insert(g.rows.end(), part.begin(), part.end());
      }
    }
    g.ran = true;
  } catch (const std::exception& e) {
    g.error = e.what();
  }
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return g;
}

void grid_note(Outcome& o, const Grid& g) {
  o.note("grid: " + std::to_string(pipeline::training_grid(g.config).size()) + " models (" +
         std::to_string(g.config.n_seeds) + " seeds), " + std::to_string(g.trained) + " trained now, " +
         std::to_string(g.resumed) + " reused from valid checkpoints, " + fmt("%.0f", g.seconds) + " s");
}

Outcome training_sanity(const Grid& g) {
  Outcome o;
  for (auto family : {models::Family::TcConv, models::Family::Fno1d}) {
    for (const auto& system : {solver::PdeSystem{solver::PdeKind::Heat, 0.05},
                               solver::PdeSystem{solver::PdeKind::Burgers, 0.02}}) {
      const auto r = t::overfit_two_trajectories(family, system, kOverfitEpochs);
      o.check(r.factor() >= t::kOverfitFactor,
              std::string("overfit ") + std::string(models::to_string(family)) + "/" +
                  std::string(solver::to_string(system.kind)) + ": train loss " + fmt("%.3e", r.loss_before) +
                  " -> " + fmt("%.3e", r.loss_after) + " (" + fmt("%.0f", r.factor()) + "x, need >= 100x)");
    }
  }
  if (!g.ran) {
    o.check(false, "training grid did not complete: " + g.error);
    return o;
  }
  grid_note(o, g);
  std::size_t groups = 0;
  for (const auto& grp : g.summary.at("groups")) {
    if (grp.at("calibration").get<bool>() || grp.at("regime") != "in_dist") continue;
    ++groups;
    const auto& m = grp.at("metrics").at("one_step").at("mean");
    const double v = m.is_null() ? NAN : m.at("estimate").get<double>();
    o.check(std::isfinite(v) && v <= kOneStepEnvelope,
            "one-step relL2 " + grp.at("system").get<std::string>() + " " + grp.at("family").get<std::string>() +
                "-" + grp.at("variant").get<std::string>() + " = " + fmt("%.4f", v) + " (<= 0.2, " +
                std::to_string(grp.at("n_complete").get<std::size_t>()) + " test records)");
  }
  o.check(groups == 8, "all four variants on both systems present (" + std::to_string(groups) + " groups)");
  return o;
}

Outcome association(const Grid& g) {
  Outcome o;
  if (!g.ran) {
    o.check(false, "training grid did not complete: " + g.error);
    return o;
  }
  grid_note(o, g);
  const auto& p = g.summary.at("pooled_association");
  if (p.is_null()) {
    o.check(false, "pooled Spearman correlation undefined");
    return o;
  }
  const double rho = p.at("spearman_rho").get<double>();
  const double lo = p.at("ci_low").get<double>(), hi = p.at("ci_high").get<double>();
  o.check(p.at("n_resamples").get<std::size_t>() == 2000, "CI from 2000 resamples");
  o.check(rho > 0.0 && lo > 0.0, "pooled Spearman(sg_unseen, rollout_auc) = " + fmt("%.4f", rho) + ", 95% CI [" +
                                     fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] over " +
                                     std::to_string(p.at("n_points").get<std::size_t>()) + " trajectories");
  o.check(rho >= kMinRho, "rho " + fmt("%.4f", rho) + " >= 0.3");
  return o;
}

Outcome composition_shift(const Grid& g) {
  Outcome o;
  if (!g.ran) {
    o.check(false, "training grid did not complete: " + g.error);
    return o;
  }
  const auto& gap = g.summary.at("seen_unseen_gap");
  const double v = gap.at("mean").is_null() ? NAN : gap.at("mean").get<double>();
  double seen = 0.0, unseen = 0.0;
  std::size_t n = 0;
  for (const auto& row : g.rows) {
    if (row.key.calibration() || !row.record.complete()) continue;
    seen += row.record.sg_seen;
    unseen += row.record.sg_unseen;
    ++n;
  }
  const double direct = (unseen - seen) / static_cast<double>(n);
  o.check(std::abs(direct - v) <= 1e-12 * std::max(1.0, std::abs(v)),
          "gap recomputed from the record CSVs: " + fmt("%.6g", direct));
  o.check(v > 0.0, "mean(unseen SG) - mean(seen SG) = " + fmt("%.6g", v) + " over " + std::to_string(n) +
                       " trajectories (mean seen " + fmt("%.4g", seen / n) + ", unseen " + fmt("%.4g", unseen / n) + ")");
  return o;
}

Outcome regularization(const Grid& g) {
  Outcome o;
  if (!g.ran) {
    o.check(false, "training grid did not complete: " + g.error);
    return o;
  }
  // Independent pairing from the raw records.
  using Key = std::tuple<std::string, std::string, std::uint64_t, std::string, std::size_t>;
  std::map<Key, std::pair<const diagnostics::DiagnosticRecord*, const diagnostics::DiagnosticRecord*>> pairs;
  for (const auto& row : g.rows) {
    if (row.key.calibration() || !row.record.complete()) continue;
    auto& slot = pairs[{row.key.system, row.key.family, row.key.seed, row.key.regime, row.record.trajectory_id}];
    (row.key.variant == "baseline" ? slot.first : slot.second) = &row.record;
  }
  const std::size_t max_pairs = g.config.systems.size() * g.config.families.size() * g.config.n_seeds *
                                g.config.regimes.size() * g.config.data.n_test;
  using Field_ = double diagnostics::DiagnosticRecord::*;
  for (const auto& [metric, member] : {std::pair<const char*, Field_>{"sg_unseen", &diagnostics::DiagnosticRecord::sg_unseen},
                                       std::pair<const char*, Field_>{"rollout_auc", &diagnostics::DiagnosticRecord::rollout_auc}}) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [key, p] : pairs) {
      if (!p.first || !p.second) continue;
      sum += p.first->*member - p.second->*member;
      ++n;
    }
    const json* entry = nullptr;
    for (const auto& c : g.summary.at("paired_differences")) {
      if (c.at("metric") == metric && c.at("scope") == "all") entry = &c;
    }
    if (entry == nullptr || entry->at("diff").is_null()) {
      o.check(false, std::string(metric) + ": paired difference missing");
      continue;
    }
    const auto& d = entry->at("diff");
    const double est = d.at("estimate").get<double>(), lo = d.at("ci_low").get<double>(),
                 hi = d.at("ci_high").get<double>();
    const double direct = sum / static_cast<double>(n);
    const bool structure = entry->at("n_pairs").get<std::size_t>() == n && n > 0 && n <= max_pairs &&
                           entry->at("direction") == "baseline_minus_sg" &&
                           entry->at("pairing") == "system,family,seed,regime,trajectory_id" &&
                           std::abs(direct - est) <= 1e-12 * std::max(1.0, std::abs(est)) && lo <= est &&
                           est <= hi && d.at("n_resamples").get<std::size_t>() == 2000;
    o.check(structure, std::string(metric) + " baseline-minus-sg = " + fmt("%.4g", est) + ", 95% CI [" +
                           fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "], " + std::to_string(n) + " of " +
                           std::to_string(max_pairs) + " matched trajectory pairs; CI " +
                           (lo <= 0.0 && hi >= 0.0 ? "contains" : "excludes") + " zero (reported)");
  }
  return o;
}

// ---- criterion 9 ----------------------------------------------------------

pipeline::ExperimentConfig determinism_config() {
  auto c = pipeline::ExperimentConfig::defaults();
  c.name = "determinism";
  c.n_seeds = 1;
  c.data.n_train = 8;
  c.data.n_val = 4;
  c.data.n_test = 4;
  c.training.epochs = 2;
  return c;
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  const auto config = determinism_config();
  const fs::path a = work / "determinism_a", b = work / "determinism_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const bool ok_a = t::run_pipeline(config, a, 1);
  const bool ok_b = t::run_pipeline(config, b, 1);
  o.check(ok_a && ok_b, "two serial end-to-end runs completed");
  const std::string sa = t::file_bytes(a / "analysis" / "summary.json");
  const std::string sb = t::file_bytes(b / "analysis" / "summary.json");
  o.check(!sa.empty() && sa == sb, "summary.json bit-identical (" + std::to_string(sa.size()) + " bytes, sha256 " +
                                       pipeline::sha256_hex(sa).substr(0, 16) + " vs " +
                                       pipeline::sha256_hex(sb).substr(0, 16) + ")");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::string work_dir;
  std::size_t seeds = 2, jobs = 1;
  bool fresh = false;
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory for runs")->required();
  app.add_option("--seeds", seeds, "Seeds in the training grid")->capture_default_str();
  app.add_option("--jobs", jobs, "Parallel training and evaluation jobs")->capture_default_str();
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--fresh", fresh, "Retrain the grid even if valid checkpoints exist");
  CLI11_PARSE(app, argc, argv);

  log::set_level(log::Level::Warn);
  fs::create_directories(work_dir);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.contains(id); };

  std::optional<Grid> grid;
  auto need_grid = [&]() -> const Grid& {
    if (!grid) grid = run_grid(fs::path(work_dir) / "grid", seeds, jobs, fresh);
    return *grid;
  };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "solver oracle suite", solver_suite},
      {2, "autodiff suite", autodiff_suite},
      {3, "diagnostic oracle suite", diagnostic_suite},
      {4, "statistics oracle suite", stats_suite},
      {5, "training sanity", [&] { return training_sanity(need_grid()); }},
      {6, "association between unseen SG error and rollout error", [&] { return association(need_grid()); }},
      {7, "composition shift", [&] { return composition_shift(need_grid()); }},
      {8, "paired regularization differences", [&] { return regularization(need_grid()); }},
      {9, "end-to-end determinism", [&] { return determinism(work_dir); }},
  };

  std::vector<std::pair<int, bool>> verdicts;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.name, secs);
    for (const auto& line : out.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    verdicts.emplace_back(c.id, out.pass);
  }
  std::size_t failed = 0;
  std::printf("\n");
  for (const auto& [id, pass] : verdicts) {
    std::printf("CRITERION %d: %s\n", id, pass ? "PASS" : "FAIL");
    failed += !pass;
  }
  return failed == 0 ? 0 : 1;
}
