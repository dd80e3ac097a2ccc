#include "tae/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/util.hpp"

namespace tae {
namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kAggregateId = "aggregate";

ojson row_json(const ReportRow& r) {
  ojson j;
  j["id"] = r.id;
  j["metric"] = r.metric;
  if (!r.variant.empty()) j["variant"] = r.variant;
  const auto& s = r.score;
  j["q_p"] = s.q_p;
  j["q_r"] = s.q_r;
  j["o_p"] = s.o_p;
  j["o_r"] = s.o_r;
  j["l"] = s.l;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["reference_count"] = s.reference_count;
  j["generated_count"] = s.generated_count;
  return j;
}

ReportRow row_from(const nlohmann::json& j) {
  ReportRow r;
  try {
    r.id = j.at("id").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    r.variant = j.value("variant", std::string{});
    auto& s = r.score;
    s.q_p = j.at("q_p").get<double>();
    s.q_r = j.at("q_r").get<double>();
    s.o_p = j.at("o_p").get<double>();
    s.o_r = j.at("o_r").get<double>();
    s.l = j.at("l").get<double>();
    s.precision = j.at("precision").get<double>();
    s.recall = j.at("recall").get<double>();
    s.f1 = j.at("f1").get<double>();
    s.reference_count = j.at("reference_count").get<std::size_t>();
    s.generated_count = j.at("generated_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report row: ") + e.what());
  }
  return r;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

std::vector<std::pair<std::string, std::string>> group_keys(const std::vector<ReportRow>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, std::string> k{r.variant, r.metric};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  return keys;
}

TaeScore group_mean(const std::vector<ReportRow>& rows, const std::pair<std::string, std::string>& key) {
  std::vector<TaeScore> scores;
  for (const auto& r : rows)
    if (r.variant == key.first && r.metric == key.second) scores.push_back(r.score);
  return macro_average(scores);
}

}  // namespace

void Report::compute_aggregates() {
  aggregates.clear();
  for (const auto& key : group_keys(rows))
    aggregates.push_back(ReportRow{kAggregateId, key.second, key.first, group_mean(rows, key)});
}

bool Report::aggregates_consistent(double tol) const {
  const auto keys = group_keys(rows);
  if (keys.size() != aggregates.size()) return false;
  for (const auto& agg : aggregates) {
    const std::pair<std::string, std::string> key{agg.variant, agg.metric};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) return false;
    const auto mean = group_mean(rows, key);
    const auto& a = agg.score;
    if (!close(a.q_p, mean.q_p, tol) || !close(a.q_r, mean.q_r, tol) || !close(a.o_p, mean.o_p, tol) ||
        !close(a.o_r, mean.o_r, tol) || !close(a.l, mean.l, tol) || !close(a.precision, mean.precision, tol) ||
        !close(a.recall, mean.recall, tol) || !close(a.f1, mean.f1, tol) ||
        a.reference_count != mean.reference_count || a.generated_count != mean.generated_count)
      return false;
  }
  return true;
}

std::string_view to_string(ReportFormat f) noexcept { return f == ReportFormat::Json ? "json" : "csv"; }

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  throw ValidationError("format: expected json or csv, got '" + std::string(text) + "'");
}

std::string render_report(const Report& report, ReportFormat format) {
  const auto& m = report.meta;
  if (format == ReportFormat::Json) {
    ojson j;
    auto& meta = j["metadata"];
    meta["tool_version"] = m.tool_version;
    meta["command"] = m.command;
    meta["config_hash"] = m.config_hash;
    meta["started_at"] = m.started_at;
    meta["finished_at"] = m.finished_at;
    if (m.seed) meta["seed"] = *m.seed;
    for (const auto& [k, v] : m.extra) meta[k] = v;
    auto& rows = j["rows"] = ojson::array();
    for (const auto& r : report.rows) rows.push_back(row_json(r));
    auto& agg = j["aggregate"] = ojson::array();
    for (const auto& r : report.aggregates) agg.push_back(row_json(r));
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# tool_version: " << m.tool_version << "\n# command: " << m.command << "\n# config_hash: " << m.config_hash
     << "\n# started_at: " << m.started_at << "\n# finished_at: " << m.finished_at << "\n";
  if (m.seed) os << "# seed: " << *m.seed << "\n";
  for (const auto& [k, v] : m.extra) os << "# " << k << ": " << v << "\n";
  os << "variant,id,metric,q_p,q_r,o_p,o_r,l,precision,recall,f1,reference_count,generated_count\n";
  auto emit = [&](const ReportRow& r) {
    const auto& s = r.score;
    os << csv_cell(r.variant) << ',' << csv_cell(r.id) << ',' << csv_cell(r.metric) << ',' << num(s.q_p) << ','
       << num(s.q_r) << ',' << num(s.o_p) << ',' << num(s.o_r) << ',' << num(s.l) << ',' << num(s.precision) << ','
       << num(s.recall) << ',' << num(s.f1) << ',' << s.reference_count << ',' << s.generated_count << '\n';
  };
  for (const auto& r : report.rows) emit(r);
  for (const auto& r : report.aggregates) emit(r);
  return os.str();
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  util::write_file_atomic(path, render_report(report, format));
}

Report parse_report(std::string_view json) {
  auto j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("report is not a JSON object");
  Report r;
  try {
    const auto& meta = j.at("metadata");
    for (auto it = meta.begin(); it != meta.end(); ++it) {
      const auto& k = it.key();
      if (k == "tool_version") r.meta.tool_version = it->get<std::string>();
      else if (k == "command") r.meta.command = it->get<std::string>();
      else if (k == "config_hash") r.meta.config_hash = it->get<std::string>();
      else if (k == "started_at") r.meta.started_at = it->get<std::string>();
      else if (k == "finished_at") r.meta.finished_at = it->get<std::string>();
      else if (k == "seed") r.meta.seed = it->get<std::uint64_t>();
      else r.meta.extra[k] = it->is_string() ? it->get<std::string>() : it->dump();
    }
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from(row));
    for (const auto& row : j.at("aggregate")) r.aggregates.push_back(row_from(row));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  if (!r.aggregates_consistent(1e-12)) throw ValidationError("report aggregate does not equal the mean of its rows");
  return r;
}

Report load_report(const std::filesystem::path& path) {
  try {
    return parse_report(util::read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace tae
