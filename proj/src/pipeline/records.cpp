#include "sgbench/pipeline/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sgbench/core/error.hpp"
#include "sgbench/pipeline/io.hpp"

namespace sgbench::pipeline {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorKind::Format,
          where + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& where) {
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos, ErrorKind::Format,
          where + ": bad integer '" + s + "'");
  return std::stoull(s);
}

json tally_json(const diagnostics::Tally& t) {
  return {{"attempted", t.attempted}, {"included", t.included}, {"excluded", t.excluded}};
}

}  // namespace

std::string RunKey::job_id() const {
  return system + "-" + family + "-" + variant + "-s" + std::to_string(seed);
}

std::string RunKey::run_id() const { return job_id() + "@" + regime; }

RunKey RunKey::parse(const std::string& id) {
  const auto at = id.rfind('@');
  require(at != std::string::npos, ErrorKind::Format, "run id without regime: " + id);
  std::vector<std::string> parts;
  std::size_t begin = 0;
  const std::string job = id.substr(0, at);
  while (true) {
    const auto dash = job.find('-', begin);
    parts.push_back(job.substr(begin, dash - begin));
    if (dash == std::string::npos) break;
    begin = dash + 1;
  }
  require(parts.size() == 4 && parts[3].size() > 1 && parts[3][0] == 's', ErrorKind::Format,
          "malformed run id: " + id);
  RunKey key{parts[0], parts[1], parts[2], parse_uint(parts[3].substr(1), id), id.substr(at + 1)};
  return key;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::vector<RecordRow> to_rows(const RunKey& key, const diagnostics::Evaluation& eval) {
  std::vector<RecordRow> rows;
  for (const auto& r : eval.records) rows.push_back({key, r});
  return rows;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<RecordRow>& rows) {
  std::string out = std::string(kRecordsHeader) + "\r\n";
  char buf[512];
  for (const auto& row : rows) {
    const auto& k = row.key;
    const auto& r = row.record;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%u", r.trajectory_id,
                  r.one_step, r.rollout_auc, r.rollout_final, r.sg_seen, r.sg_unseen,
                  static_cast<unsigned>(r.flags));
    out += k.run_id() + "," + k.system + "," + k.family + "," + k.variant + "," +
           std::to_string(k.seed) + "," + buf + "\r\n";
  }
  write_text_atomic(path, out);
}

std::vector<RecordRow> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  require(next_line() && line == kRecordsHeader, ErrorKind::Format,
          path.string() + ": unexpected records header");
  std::vector<RecordRow> rows;
  std::size_t lineno = 1;
  while (next_line()) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    require(f.size() == 12, ErrorKind::Format, where + ": expected 12 fields");
    RecordRow row;
    row.key = RunKey::parse(f[0]);
    require(row.key.system == f[1] && row.key.family == f[2] && row.key.variant == f[3] &&
                std::to_string(row.key.seed) == f[4],
            ErrorKind::Format, where + ": run_id disagrees with key columns");
    auto& r = row.record;
    r.trajectory_id = parse_uint(f[5], where);
    r.one_step = parse_double(f[6], where);
    r.rollout_auc = parse_double(f[7], where);
    r.rollout_final = parse_double(f[8], where);
    r.sg_seen = parse_double(f[9], where);
    r.sg_unseen = parse_double(f[10], where);
    r.flags = static_cast<std::uint32_t>(parse_uint(f[11], where));
    rows.push_back(std::move(row));
  }
  return rows;
}

json records_to_json(const RunKey& key, const diagnostics::Evaluation& eval) {
  json records = json::array();
  for (const auto& r : eval.records) {
    records.push_back({{"trajectory_id", r.trajectory_id},
                       {"one_step", number_or_null(r.one_step)},
                       {"rollout_auc", number_or_null(r.rollout_auc)},
                       {"rollout_final", number_or_null(r.rollout_final)},
                       {"sg_seen", number_or_null(r.sg_seen)},
                       {"sg_unseen", number_or_null(r.sg_unseen)},
                       {"flags", r.flags},
                       {"flag_names", diagnostics::describe_flags(r.flags)}});
  }
  return {{"run_id", key.run_id()},
          {"system", key.system},
          {"family", key.family},
          {"variant", key.variant},
          {"seed", key.seed},
          {"regime", key.regime},
          {"tally",
           {{"one_step", tally_json(eval.one_step)},
            {"sg_seen", tally_json(eval.sg_seen)},
            {"sg_unseen", tally_json(eval.sg_unseen)},
            {"truncated_rollouts", eval.truncated_rollouts}}},
          {"records", records}};
}

void write_records_json(const std::filesystem::path& path, const RunKey& key,
                        const diagnostics::Evaluation& eval) {
  write_text_atomic(path, records_to_json(key, eval).dump(2) + "\n");
}

}  // namespace sgbench::pipeline
