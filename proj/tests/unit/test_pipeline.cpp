#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "sgbench/core/error.hpp"
#include "sgbench/core/log.hpp"
#include "sgbench/pipeline/analyze.hpp"
#include "sgbench/pipeline/config.hpp"
#include "sgbench/pipeline/hashing.hpp"
#include "sgbench/pipeline/io.hpp"
#include "sgbench/pipeline/manifest.hpp"
#include "sgbench/pipeline/records.hpp"
#include "sgbench/pipeline/run.hpp"
#include "support/criteria.hpp"

using namespace sgbench;
using namespace sgbench::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sgbench_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RecordRow make_row(const std::string& variant, std::uint64_t seed, std::size_t traj, double sg_unseen,
                   double auc, double sg_seen = 0.0) {
  RecordRow r;
  r.key = {"heat", "fno1d", variant, seed, "in_dist"};
  r.record.trajectory_id = traj;
  r.record.one_step = 0.1;
  r.record.rollout_auc = auc;
  r.record.rollout_final = auc;
  r.record.sg_seen = sg_seen;
  r.record.sg_unseen = sg_unseen;
  return r;
}

struct QuietLog {
  log::Level saved = log::level();
  QuietLog() { log::set_level(log::Level::Error); }
  ~QuietLog() { log::set_level(saved); }
};

}  // namespace

TEST_CASE("sha256 known digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto dir = temp_dir("sha");
  write_text_atomic(dir / "x.txt", "abc");
  CHECK(sha256_file(dir / "x.txt") == sha256_hex("abc"));
}

TEST_CASE("config round trip, hash and run id") {
  const auto c = ExperimentConfig::defaults();
  CHECK_NOTHROW(c.validate());
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(run_id(c).rfind("sgb-", 0) == 0);
  CHECK(run_id(c).size() == 16);

  auto other = c;
  other.seed_offset = 5;
  CHECK(config_hash(other) != config_hash(c));
  CHECK(other.seeds() == std::vector<std::uint64_t>{5, 6, 7, 8, 9});

  const auto dir = temp_dir("config");
  save_config(dir / "c.json", other);
  CHECK(config_hash(load_config(dir / "c.json")) == config_hash(other));
}

TEST_CASE("config defaults and partial documents") {
  const auto c = config_from_json(json::object());
  CHECK(c.systems.size() == 2);
  CHECK(c.regimes.size() == 3);
  CHECK(c.families.size() == 2);
  CHECK(c.variants.size() == 2);
  CHECK(c.variant("sg").lambda_sg == 0.01);
  CHECK(c.n_seeds == 5);
  CHECK(c.system(solver::PdeKind::Heat).nu == 0.05);
  CHECK(c.system(solver::PdeKind::Burgers).nu == 0.02);
  CHECK(training_grid(c).size() == 40);

  const auto p = config_from_json(json{{"seeds", {{"count", 2}}}, {"training", {{"epochs", 7}}}});
  CHECK(p.n_seeds == 2);
  CHECK(p.training.epochs == 7);
  CHECK(p.training.batch_size == c.training.batch_size);
}

TEST_CASE("config rejects unknown keys and invalid values") {
  CHECK_THROWS_AS(config_from_json(json{{"sedes", 3}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"training", {{"epoch", 3}}}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"training", {{"epochs", "many"}}}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"variants", {{{"name", "a-b"}, {"lambda_sg", 0.0}}}}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"regimes", {"nu_shift"}}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"diagnostics", {{"rollout_dt", 0.03}}}}), Error);
  CHECK_THROWS_AS(config_from_json(json{{"grid", {{"nx", 16}}}}), Error);
}

TEST_CASE("dataset and model configs follow the grid") {
  const auto c = ExperimentConfig::defaults();
  const auto& burgers = c.system(solver::PdeKind::Burgers);
  const auto shifted = c.dataset_config(burgers, solver::Regime::ViscosityShift);
  CHECK(shifted.system.nu == 0.03);
  CHECK(c.dataset_config(burgers, solver::Regime::IcSpectrumShift).ic.decay_exponent == 1.0);
  const auto m = c.model_config(models::Family::Fno1d, 3);
  CHECK(m.seed == 3);
  CHECK(m.family == models::Family::Fno1d);
  CHECK(m.nx == c.grid.nx);
  CHECK(c.train_config(c.variant("sg"), 4).lambda_sg == 0.01);
  CHECK(c.train_config(c.variant("baseline"), 4).seed == 4);
  CHECK(c.diag_config().unseen_pairs.size() == 145);
}

TEST_CASE("run keys and filters") {
  const RunKey k{"burgers", "fno1d", "sg", 0, "nu_shift"};
  CHECK(k.job_id() == "burgers-fno1d-sg-s0");
  CHECK(k.run_id() == "burgers-fno1d-sg-s0@nu_shift");
  CHECK(RunKey::parse(k.run_id()) == k);
  CHECK_THROWS_AS(RunKey::parse("burgers-fno1d-sg-s0"), Error);
  CHECK_THROWS_AS(RunKey::parse("burgers-fno1d-s0@in_dist"), Error);

  const std::vector<Filter> one{Filter::parse("family=fno1d"), Filter::parse("variant=sg"),
                                Filter::parse("seed=0"), Filter::parse("system=burgers")};
  std::size_t n = 0;
  for (const auto& key : training_grid(ExperimentConfig::defaults())) n += matches(one, key);
  CHECK(n == 1);
  CHECK(matches({Filter::parse("regime=in_dist")}, RunKey{"heat", "fno1d", "sg", 0, ""}));
  CHECK_FALSE(matches({Filter::parse("regime=in_dist")}, k));
  CHECK_THROWS_AS(Filter::parse("colour=red"), Error);
  CHECK_THROWS_AS(Filter::parse("system"), Error);
  CHECK_THROWS_AS(Filter::parse("system="), Error);
}

TEST_CASE("csv line splitting") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("\"x,y\",\"say \"\"hi\"\"\",z") ==
        std::vector<std::string>{"x,y", "say \"hi\"", "z"});
}

TEST_CASE("records csv round trip") {
  const auto dir = temp_dir("records");
  std::vector<RecordRow> rows{make_row("sg", 2, 0, 0.125, 1.5), make_row("sg", 2, 1, 1.0 / 3.0, 2.0)};
  rows[1].record.rollout_final = std::nan("");
  rows[1].record.flags = diagnostics::kFlagRolloutTruncated | diagnostics::kFlagSgSeenExcluded;
  write_records_csv(dir / "r.csv", rows);
  const auto text = testing::file_bytes(dir / "r.csv");
  CHECK(text.rfind(std::string(kRecordsHeader) + "\r\n", 0) == 0);
  const auto back = read_records_csv(dir / "r.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].key == rows[0].key);
  CHECK(back[1].record.sg_unseen == rows[1].record.sg_unseen);
  CHECK(std::isnan(back[1].record.rollout_final));
  CHECK(back[1].record.flags == rows[1].record.flags);
  CHECK_FALSE(back[1].record.complete());

  write_text_atomic(dir / "bad.csv", std::string(kRecordsHeader) + "\r\nx,y\r\n");
  CHECK_THROWS_AS(read_records_csv(dir / "bad.csv"), Error);
  write_text_atomic(dir / "header.csv", "run_id\r\n");
  CHECK_THROWS_AS(read_records_csv(dir / "header.csv"), Error);
}

TEST_CASE("analysis pairs baseline and treated records by trajectory") {
  std::vector<RecordRow> rows;
  for (std::uint64_t seed : {0, 1}) {
    for (std::size_t t = 0; t < 4; ++t) {
      const double base = 0.1 * static_cast<double>(t + 1) + 0.01 * static_cast<double>(seed);
      rows.push_back(make_row("baseline", seed, t, base, 10.0 * base, 0.5 * base));
      rows.push_back(make_row("sg", seed, t, base - 0.02, 10.0 * base - 0.1, 0.5 * base));
    }
  }
  // A treated record with no baseline partner must not be paired.
  rows.push_back(make_row("sg", 7, 0, 5.0, 5.0));
  AnalysisSettings s;
  s.n_resamples = 300;
  const auto r = analyze_records(rows, s);
  CHECK(r.n_records == 17);
  CHECK(r.pooled_points == 17);
  REQUIRE(r.pooled.has_value());
  CHECK(r.pooled->spearman_rho > 0.9);
  REQUIRE(r.seen_unseen_gap.has_value());
  CHECK(*r.seen_unseen_gap > 0.0);

  bool found = false;
  for (const auto& c : r.paired) {
    if (c.scope != "all") continue;
    CHECK(c.n_pairs == 8);
    REQUIRE(c.diff.has_value());
    const double expected = c.metric == "sg_unseen" ? 0.02 : 0.1;
    CHECK(c.diff->point_estimate == doctest::Approx(expected));
    CHECK(c.diff->ci_low == doctest::Approx(expected));
    CHECK(c.diff->ci_high == doctest::Approx(expected));
    found = true;
  }
  CHECK(found);

  const auto doc = summary_json(r, s);
  CHECK(doc.at("paired_differences").size() == 4);
  CHECK(doc.at("paired_differences")[0].at("direction") == "baseline_minus_sg");
  CHECK(summary_json(analyze_records(rows, s), s).dump() == doc.dump());
  const auto table = summary_csv(r);
  CHECK(table.rfind("system,model,one_step,rollout,sg_unseen,rho\r\n", 0) == 0);
  CHECK(table.find("heat,fno1d-baseline,") != std::string::npos);
}

TEST_CASE("analysis flags null groups and excludes incomplete records") {
  std::vector<RecordRow> rows{make_row("baseline", 0, 0, 0.1, 1.0)};
  rows.push_back(make_row("baseline", 0, 1, std::nan(""), 1.0));
  rows.back().record.flags = diagnostics::kFlagSgUnseenExcluded;
  const auto r = analyze_records(rows, AnalysisSettings{});
  CHECK(r.n_complete == 1);
  CHECK(r.flagged.size() == 1);
  REQUIRE(r.groups.size() == 1);
  CHECK_FALSE(r.groups[0].metric("sg_unseen").mean.has_value());
  CHECK_FALSE(r.pooled.has_value());
  CHECK(summary_json(r, AnalysisSettings{}).at("groups")[0].at("null") == true);
}

TEST_CASE("manifest artifacts are checked") {
  const auto dir = temp_dir("manifest");
  write_text_atomic(dir / "a.json", "{\"x\": 1}\n");
  write_text_atomic(dir / "b.md", "# hi\n");
  RunManifest m;
  m.run_id = "sgb-test";
  JobEntry job;
  job.id = "j";
  job.stage = "analyze";
  job.artifacts = {make_artifact(dir, dir / "a.json", ArtifactFormat::Json),
                   make_artifact(dir, dir / "b.md", ArtifactFormat::Markdown)};
  CHECK(job.artifacts[0].path == "a.json");
  m.upsert(job);
  m.upsert(job);
  CHECK(m.jobs.size() == 1);
  CHECK_NOTHROW(finalize_manifest(dir, m));
  const auto loaded = load_manifest(dir);
  REQUIRE(loaded.has_value());
  CHECK(to_json(*loaded) == to_json(m));
  CHECK(loaded->find("j") != nullptr);
  CHECK(loaded->find("k") == nullptr);

  SUBCASE("changed file") {
    write_text_atomic(dir / "a.json", "{\"x\": 2}\n");
    CHECK_THROWS_AS(finalize_manifest(dir, m), Error);
  }
  SUBCASE("missing file") {
    fs::remove(dir / "b.md");
    CHECK_THROWS_AS(finalize_manifest(dir, m), Error);
  }
  SUBCASE("malformed file") {
    write_text_atomic(dir / "c.json", "{not json");
    JobEntry bad;
    bad.id = "bad";
    bad.artifacts = {make_artifact(dir, dir / "c.json", ArtifactFormat::Json)};
    m.upsert(bad);
    CHECK_THROWS_AS(finalize_manifest(dir, m), Error);
  }
  CHECK(parse_job_status(to_string(JobStatus::Skipped)) == JobStatus::Skipped);
  CHECK(parse_artifact_format(to_string(ArtifactFormat::RecordsCsv)) == ArtifactFormat::RecordsCsv);
}

TEST_CASE("parallel runner covers every index") {
  std::vector<int> hits(50, 0);
  run_parallel(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(run_parallel(5, 2, [](std::size_t i) {
                    if (i == 3) fail(ErrorKind::Io, "boom");
                  }),
                  Error);
}

TEST_CASE("generate is deterministic and guards existing runs") {
  QuietLog quiet;
  const auto config = testing::tiny_experiment();
  const auto a = temp_dir("gen_a"), b = temp_dir("gen_b");
  StageOptions o;
  CHECK(run_generate(config, a, o).success());
  CHECK(run_generate(config, b, o).success());
  const auto ma = load_manifest(a).value(), mb = load_manifest(b).value();
  CHECK(ma.run_id == run_id(config));
  std::size_t datasets = 0;
  for (const auto& job : ma.jobs) {
    const auto* other = mb.find(job.id);
    REQUIRE(other != nullptr);
    REQUIRE(other->artifacts.size() == job.artifacts.size());
    for (std::size_t i = 0; i < job.artifacts.size(); ++i) {
      CHECK(job.artifacts[i].sha256 == other->artifacts[i].sha256);
      datasets += job.artifacts[i].format == ArtifactFormat::DatasetBinary;
    }
  }
  CHECK(datasets == 2 * 3 * 3);
  CHECK_THROWS_AS(run_generate(config, a, o), Error);
  o.force = true;
  CHECK(run_generate(config, a, o).success());
}

TEST_CASE("tiny end-to-end run") {
  QuietLog quiet;
  const auto config = testing::tiny_experiment();
  const auto dir = temp_dir("e2e");
  REQUIRE(testing::run_pipeline(config, dir));
  const RunLayout layout{dir};

  const auto manifest = load_manifest(dir).value();
  auto reloaded = load_manifest(dir).value();
  CHECK_NOTHROW(finalize_manifest(dir, reloaded));
  std::size_t checkpoints = 0, record_files = 0;
  for (const auto& job : manifest.jobs) {
    CHECK(job.status == JobStatus::Ok);
    for (const auto& a : job.artifacts) {
      checkpoints += a.format == ArtifactFormat::Checkpoint;
      record_files += a.format == ArtifactFormat::RecordsCsv;
    }
  }
  const std::size_t models = training_grid(config).size();
  CHECK(models == 8);
  CHECK(checkpoints == 2 * models);
  CHECK(record_files == models * 3 + 2 * 2 * 3);

  // Every file under the run directory is referenced by the manifest.
  std::set<std::string> referenced{kManifestFile};
  for (const auto& job : manifest.jobs) {
    for (const auto& a : job.artifacts) referenced.insert(a.path);
  }
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    CHECK_MESSAGE(referenced.contains(fs::relative(e.path(), dir).generic_string()), e.path());
  }

  const auto summary = read_json_file(layout.analysis_dir() / "summary.json");
  const std::size_t trained_records = models * config.regimes.size() * config.data.n_test;
  const std::size_t calibration_records = 2 * 2 * config.regimes.size() * config.data.n_test;
  CHECK(summary.at("n_records") == trained_records + calibration_records);
  CHECK(summary.at("pooled_points").get<std::size_t>() <= trained_records);
  for (const auto& g : summary.at("groups")) {
    if (g.at("family") == "identity") {
      CHECK(g.at("metrics").at("sg_unseen").at("mean").at("estimate") == 0.0);
      CHECK(g.at("metrics").at("sg_seen").at("mean").at("estimate") == 0.0);
    }
  }
  const std::string report = testing::file_bytes(layout.report());
  CHECK(report.find(manifest.config_hash) != std::string::npos);
  CHECK(report.find(tool_version()) != std::string::npos);
  CHECK(report.find("Association (rho > 0, CI excludes 0): ") != std::string::npos);

  SUBCASE("resume skips current jobs") {
    const auto t = run_train(dir, StageOptions{});
    CHECK(t.ok == 0);
    CHECK(t.skipped == models);
    const auto e = run_evaluate(dir, StageOptions{});
    CHECK(e.ok == 0);
    CHECK(e.failed == 0);
  }
  SUBCASE("filtered retrain") {
    StageOptions o;
    o.force = true;
    o.filters = {Filter::parse("system=burgers"), Filter::parse("family=fno1d"),
                 Filter::parse("variant=sg"), Filter::parse("seed=0")};
    CHECK(run_train(dir, o).ok == 1);
  }
  SUBCASE("tampered config is refused") {
    auto changed = config;
    changed.training.epochs = 99;
    save_config(layout.config(), changed);
    CHECK_THROWS_AS(run_train(dir, StageOptions{}), Error);
  }
}

TEST_CASE("end-to-end summary is reproducible, serial and parallel") {
  QuietLog quiet;
  auto config = testing::tiny_experiment();
  config.systems.pop_back();
  config.regimes = {solver::Regime::InDistribution};
  const auto a = temp_dir("repro_a"), b = temp_dir("repro_b");
  REQUIRE(testing::run_pipeline(config, a, 1));
  REQUIRE(testing::run_pipeline(config, b, 3));
  CHECK(testing::file_bytes(a / "analysis" / "summary.json") ==
        testing::file_bytes(b / "analysis" / "summary.json"));
}

TEST_CASE("run directories may be given relative to the working directory") {
  QuietLog quiet;
  auto config = testing::tiny_experiment();
  config.systems.pop_back();
  config.regimes = {solver::Regime::InDistribution};
  const auto base = temp_dir("relative");
  const auto saved = fs::current_path();
  fs::current_path(base);
  const bool ok = testing::run_pipeline(config, fs::path("nested") / "run", 1);
  fs::current_path(saved);
  REQUIRE(ok);
  const auto dir = base / "nested" / "run";
  const auto manifest = load_manifest(dir);
  REQUIRE(manifest.has_value());
  for (const auto& job : manifest->jobs) {
    for (const auto& a : job.artifacts) {
      CHECK(fs::path(a.path).is_relative());
      CHECK_NOTHROW(check_artifact(dir, a));
    }
  }
  CHECK(config_hash(open_run(dir).config) == config_hash(config));
}
