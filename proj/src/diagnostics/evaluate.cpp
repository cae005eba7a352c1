#include "sgbench/diagnostics/evaluate.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <utility>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/diagnostics/rollout.hpp"

namespace sgbench::diagnostics {
namespace {

constexpr double kTimeTol = 1e-9;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct Query {
  std::size_t anchor = 0;
  TimePair pair;
  bool seen = true;
};

std::vector<Query> draw_queries(const DiagConfig& config, const solver::GridSpec& grid,
                                std::size_t trajectory_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.anchor_seed),
                    static_cast<std::uint32_t>(config.anchor_seed >> 32),
                    static_cast<std::uint32_t>(trajectory_id), 0x616e6368u};
  std::mt19937_64 rng(seq);
  std::vector<Query> queries;
  auto draw = [&](const TimePair& pair, bool seen) {
    std::size_t last = 0;
    for (std::size_t m = 0; m < grid.n_times; ++m) {
      if (grid.time(m) + pair.s + pair.t <= grid.t_max + kTimeTol) last = m;
    }
    std::uniform_int_distribution<std::size_t> pick(0, last);
    queries.push_back({pick(rng), pair, seen});
  };
  for (const auto& p : config.seen_pairs) draw(p, true);
  for (const auto& p : config.unseen_pairs) draw(p, false);
  return queries;
}

// Evaluates G(u_m, dt) for a set of (anchor, dt) keys in one batch.
class DirectCache {
public:
  using Key = std::pair<std::size_t, double>;

  void request(std::size_t anchor, double dt) { results_.try_emplace({anchor, dt}); }

  void run(const Simulator& model, const solver::Trajectory& traj) {
    std::vector<Field> inputs;
    std::vector<double> dts;
    for (const auto& [key, value] : results_) {
      inputs.push_back(traj.state(key.first));
      dts.push_back(key.second);
    }
    auto outputs = model.advance_batch(inputs, dts);
    std::size_t i = 0;
    for (auto& [key, value] : results_) value = std::move(outputs[i++]);
  }

  const Field& at(std::size_t anchor, double dt) const { return results_.at({anchor, dt}); }

private:
  std::map<Key, Field> results_;
};

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return nan();
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

}  // namespace

DiagConfig DiagConfig::grid_pairs(const solver::GridSpec& grid, double seen_fraction) {
  DiagConfig config;
  config.seen_fraction = seen_fraction;
  const std::size_t steps = grid.n_times - 1;
  const double delta = grid.saved_dt();
  for (std::size_t i = 1; i < steps; ++i) {
    for (std::size_t j = 1; i + j <= steps; ++j) {
      const TimePair pair{static_cast<double>(i) * delta, static_cast<double>(j) * delta};
      if (pair.s + pair.t <= seen_fraction * grid.t_max + kTimeTol) {
        config.seen_pairs.push_back(pair);
      } else {
        config.unseen_pairs.push_back(pair);
      }
    }
  }
  return config;
}

void DiagConfig::validate(const solver::GridSpec& grid) const {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::Config, "diag: epsilon must be > 0");
  require(rollout_dt > 0.0, ErrorKind::Config, "diag: rollout_dt must be > 0");
  const double spacing = grid.saved_dt();
  const double substeps = std::round(spacing / rollout_dt);
  require(substeps >= 1.0 && std::abs(substeps * rollout_dt - spacing) <= 1e-9 * spacing,
          ErrorKind::Config, "diag: rollout_dt must divide the saved spacing");
  const double split = seen_fraction * grid.t_max;
  auto check = [&](const TimePair& p, bool seen) {
    require(p.s > 0.0 && p.t > 0.0 && p.s + p.t <= grid.t_max + kTimeTol, ErrorKind::Config,
            "diag: pair must satisfy s, t > 0 and s + t <= t_max");
    const bool inside = p.s + p.t <= split + kTimeTol;
    require(inside == seen, ErrorKind::Config,
            seen ? "diag: seen pair exceeds the seen horizon" : "diag: unseen pair lies inside the seen horizon");
  };
  for (const auto& p : seen_pairs) check(p, true);
  for (const auto& p : unseen_pairs) check(p, false);
}

std::string describe_flags(std::uint32_t flags) {
  static const std::pair<std::uint32_t, const char*> names[] = {
      {kFlagRolloutTruncated, "rollout_truncated"},
      {kFlagOneStepExcluded, "one_step_excluded"},
      {kFlagSgSeenExcluded, "sg_seen_excluded"},
      {kFlagSgUnseenExcluded, "sg_unseen_excluded"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

bool DiagnosticRecord::complete() const {
  return std::isfinite(one_step) && std::isfinite(rollout_auc) && std::isfinite(rollout_final) &&
         std::isfinite(sg_seen) && std::isfinite(sg_unseen);
}

Tally& Tally::operator+=(const Tally& other) {
  attempted += other.attempted;
  included += other.included;
  excluded += other.excluded;
  return *this;
}

Evaluation evaluate_model(const Simulator& model, const solver::Dataset& test,
                          const DiagConfig& config) {
  require(test.split == solver::Split::Test, ErrorKind::InvalidArgument,
          "evaluate_model: dataset must be the test split");
  const auto& grid = test.grid;
  config.validate(grid);
  const double dx = grid.dx();
  const double eps = config.epsilon;
  const double delta = grid.saved_dt();

  Evaluation eval;
  eval.records.resize(test.size());

  std::vector<Field> initial;
  for (const auto& traj : test.trajectories) initial.push_back(traj.state(0));
  const auto rollouts = rollout_batch(model, initial, config.rollout_dt, grid);

  for (std::size_t id = 0; id < test.size(); ++id) {
    const auto& traj = test.trajectories[id];
    auto& rec = eval.records[id];
    rec.trajectory_id = id;

    // One-step: forward(u_k, delta) against u_{k+1}.
    std::vector<Field> inputs;
    for (std::size_t k = 0; k + 1 < traj.n_times(); ++k) inputs.push_back(traj.state(k));
    const std::vector<double> dts(inputs.size(), delta);
    const auto one_step = model.advance_batch(inputs, dts);
    std::vector<double> errors;
    for (std::size_t k = 0; k < one_step.size(); ++k) {
      const bool ok = all_finite(one_step[k]);
      eval.one_step.add(ok);
      if (ok) errors.push_back(rel_l2(one_step[k], traj.at(k + 1), eps, dx));
    }
    if (errors.size() < one_step.size()) rec.flags |= kFlagOneStepExcluded;
    rec.one_step = mean_of(errors);

    const auto& roll = rollouts[id];
    if (roll.truncated) {
      rec.flags |= kFlagRolloutTruncated;
      ++eval.truncated_rollouts;
    }
    const auto metrics = rollout_metrics(roll.states, trajectory_states(traj), eps, dx);
    rec.rollout_auc = metrics.auc;
    rec.rollout_final = metrics.final_error;

    // Semigroup: direct evaluations are shared between pairs with the same anchor and elapsed time.
    const auto queries = draw_queries(config, grid, id);
    DirectCache direct;
    for (const auto& q : queries) {
      direct.request(q.anchor, q.pair.s);
      direct.request(q.anchor, q.pair.s + q.pair.t);
    }
    direct.run(model, traj);

    std::vector<Field> inner;
    std::vector<double> outer_dts;
    std::vector<std::size_t> composed_of;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const Field& u_s = direct.at(queries[qi].anchor, queries[qi].pair.s);
      if (!all_finite(u_s)) continue;
      inner.push_back(u_s);
      outer_dts.push_back(queries[qi].pair.t);
      composed_of.push_back(qi);
    }
    const auto composed = model.advance_batch(inner, outer_dts);
    std::vector<double> sg(queries.size(), nan());
    for (std::size_t c = 0; c < composed.size(); ++c) {
      const auto& q = queries[composed_of[c]];
      const Field& whole = direct.at(q.anchor, q.pair.s + q.pair.t);
      if (all_finite(composed[c]) && all_finite(whole)) {
        sg[composed_of[c]] = rel_l2(composed[c], whole, eps, dx);
      }
    }
    std::vector<double> seen_vals, unseen_vals;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const bool ok = std::isfinite(sg[qi]);
      if (queries[qi].seen) {
        eval.sg_seen.add(ok);
        if (ok) seen_vals.push_back(sg[qi]);
      } else {
        eval.sg_unseen.add(ok);
        if (ok) unseen_vals.push_back(sg[qi]);
      }
    }
    if (seen_vals.size() < config.seen_pairs.size()) rec.flags |= kFlagSgSeenExcluded;
    if (unseen_vals.size() < config.unseen_pairs.size()) rec.flags |= kFlagSgUnseenExcluded;
    rec.sg_seen = mean_of(seen_vals);
    rec.sg_unseen = mean_of(unseen_vals);
  }

  const std::size_t excluded =
      eval.one_step.excluded + eval.sg_seen.excluded + eval.sg_unseen.excluded;
  if (excluded > 0 || eval.truncated_rollouts > 0) {
    log::warn("evaluate: excluded " + std::to_string(excluded) + " non-finite sub-results, " +
              std::to_string(eval.truncated_rollouts) + " truncated rollouts");
  }
  return eval;
}

}  // namespace sgbench::diagnostics
