#include "tae/analysis.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/util.hpp"

namespace tae {
namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

template <class F>
void for_each_line(std::string_view contents, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    ++line_no;
    auto line = util::trim(contents.substr(start, nl - start));
    start = nl + 1;
    if (!line.empty()) f(line, line_no);
  }
}

nlohmann::json parse_object(const std::string& line, const std::string& source, std::size_t line_no) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError(where(source, line_no) + "invalid JSON", line_no);
  if (!j.is_object()) throw ParseError(where(source, line_no) + "record is not an object", line_no);
  return j;
}

const nlohmann::json& field(const nlohmann::json& j, const char* name, const std::string& source,
                            std::size_t line_no) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null())
    throw MissingField(where(source, line_no) + "missing field '" + name + "'", line_no);
  return *it;
}

std::string string_field(const nlohmann::json& j, const char* name, const std::string& source,
                         std::size_t line_no) {
  const auto& v = field(j, name, source, line_no);
  if (!v.is_string()) throw ParseError(where(source, line_no) + "field '" + name + "' must be a string", line_no);
  return v.get<std::string>();
}

double number_field(const nlohmann::json& j, const char* name, const std::string& source, std::size_t line_no) {
  const auto& v = field(j, name, source, line_no);
  if (!v.is_number()) throw ParseError(where(source, line_no) + "field '" + name + "' must be a number", line_no);
  return v.get<double>();
}

double parse_number(const std::string& text, const char* name, const std::string& source, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ParseError(where(source, line_no) + "column '" + name + "' is not a number: '" + text + "'", line_no);
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(util::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(util::trim(cur));
  return out;
}

MetricDelta make_delta(std::string doc, std::string metric, double with_score, double skip_score,
                       const std::string& source, std::size_t line_no) {
  const double s = with_score - skip_score;
  if (!std::isfinite(s)) throw ParseError(where(source, line_no) + "delta is not finite", line_no);
  return {std::move(doc), std::move(metric), s};
}

}  // namespace

int signed_preference(const PreferenceAnnotation& ann) {
  return ann.preferred == Preferred::WithRep ? ann.degree : -ann.degree;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatch("pearson: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + " values");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateInput("pearson needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: a side has zero variance");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

Affinity affinity(std::span<const MetricDelta> deltas, std::span<const PreferenceAnnotation> prefs) {
  std::unordered_map<std::string, double> by_doc;
  std::set<std::string> metrics;
  for (const auto& d : deltas) {
    metrics.insert(d.metric);
    by_doc[d.doc_id] = d.s;
  }
  if (metrics.size() > 1) throw ValidationError("affinity: deltas mix several metrics");
  std::vector<double> s, p;
  s.reserve(prefs.size());
  p.reserve(prefs.size());
  for (const auto& a : prefs) {
    auto it = by_doc.find(a.doc_id);
    if (it == by_doc.end()) throw MissingDelta(a.doc_id);
    s.push_back(it->second);
    p.push_back(signed_preference(a));
  }
  Affinity out;
  out.r = pearson(s, p);
  out.n = s.size();
  if (out.n <= 2) {
    out.p_note = "n too small for a significance estimate";
    return out;
  }
  const double df = static_cast<double>(out.n - 2);
  const double denom = 1.0 - out.r * out.r;
  if (denom <= 0.0) {
    out.t = std::copysign(INFINITY, out.r);
    out.p_value = 0.0;
  } else {
    out.t = out.r * std::sqrt(df / denom);
    boost::math::students_t dist(df);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
  }
  std::ostringstream note;
  note << "t=" << out.t << " df=" << (out.n - 2) << " p" << (out.p_value > 0.01 ? ">" : "<=") << "0.01";
  out.p_note = note.str();
  return out;
}

double krippendorff_alpha(std::span<const PreferenceAnnotation> prefs) {
  std::map<std::string, std::vector<int>> units;
  for (const auto& a : prefs) units[a.doc_id].push_back(a.preferred == Preferred::WithRep ? 0 : 1);
  double o[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  bool pairable = false;
  for (const auto& [id, values] : units) {
    const auto m = values.size();
    if (m < 2) continue;
    pairable = true;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) o[values[i]][values[j]] += 1.0 / static_cast<double>(m - 1);
  }
  if (!pairable) throw InsufficientData("krippendorff_alpha needs a document with at least two annotators");
  const double n0 = o[0][0] + o[0][1];
  const double n1 = o[1][0] + o[1][1];
  const double n = n0 + n1;
  const double d_o = (o[0][1] + o[1][0]) / n;
  if (d_o == 0.0) return 1.0;
  const double d_e = 2.0 * n0 * n1 / (n * (n - 1.0));
  return 1.0 - d_o / d_e;
}

PreferenceRate preference_rate(std::span<const PreferenceAnnotation> prefs) {
  if (prefs.empty()) throw InsufficientData("preference_rate needs at least one annotation");
  std::map<std::string, std::pair<std::size_t, std::size_t>> docs;  // (with, total)
  for (const auto& a : prefs) {
    auto& [with, total] = docs[a.doc_id];
    with += a.preferred == Preferred::WithRep ? 1 : 0;
    ++total;
  }
  std::size_t majority = 0, unanimous = 0;
  for (const auto& [id, counts] : docs) {
    if (2 * counts.first > counts.second) ++majority;
    if (counts.first == counts.second) ++unanimous;
  }
  PreferenceRate r;
  r.documents = docs.size();
  r.majority_rate = static_cast<double>(majority) / static_cast<double>(docs.size());
  r.unanimous_rate = static_cast<double>(unanimous) / static_cast<double>(docs.size());
  return r;
}

std::vector<PreferenceAnnotation> parse_annotations(std::string_view contents, const std::string& source) {
  std::vector<PreferenceAnnotation> out;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_line(contents, [&](const std::string& line, std::size_t line_no) {
    const auto j = parse_object(line, source, line_no);
    PreferenceAnnotation a;
    a.doc_id = string_field(j, "doc_id", source, line_no);
    a.annotator_id = string_field(j, "annotator_id", source, line_no);
    const auto pref = string_field(j, "preferred", source, line_no);
    if (pref == "with") a.preferred = Preferred::WithRep;
    else if (pref == "skip") a.preferred = Preferred::SkipRep;
    else throw ParseError(where(source, line_no) + "field 'preferred' must be \"with\" or \"skip\"", line_no);
    const auto& deg = field(j, "degree", source, line_no);
    if (!deg.is_number_integer() || deg.get<int>() < 1 || deg.get<int>() > 3)
      throw ParseError(where(source, line_no) + "field 'degree' must be 1, 2 or 3", line_no);
    a.degree = deg.get<int>();
    if (!seen.emplace(a.doc_id, a.annotator_id).second)
      throw DuplicateId(where(source, line_no) + "annotator '" + a.annotator_id + "' already judged '" +
                            a.doc_id + "'",
                        line_no);
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<PreferenceAnnotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(util::read_file(path), path.string());
}

std::vector<MetricDelta> parse_deltas(std::string_view contents, const std::string& source) {
  std::vector<MetricDelta> out;
  const auto first = contents.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return out;
  if (contents[first] == '{') {
    for_each_line(contents, [&](const std::string& line, std::size_t line_no) {
      const auto j = parse_object(line, source, line_no);
      out.push_back(make_delta(string_field(j, "doc_id", source, line_no), string_field(j, "metric", source, line_no),
                               number_field(j, "with_score", source, line_no),
                               number_field(j, "skip_score", source, line_no), source, line_no));
    });
    return out;
  }
  std::vector<std::size_t> cols;
  for_each_line(contents, [&](const std::string& line, std::size_t line_no) {
    const auto cells = split_csv(line);
    if (cols.empty()) {
      for (const char* name : {"doc_id", "metric", "with_score", "skip_score"}) {
        auto it = std::find(cells.begin(), cells.end(), name);
        if (it == cells.end()) throw MissingField(where(source, line_no) + "header lacks column '" + name + "'", line_no);
        cols.push_back(static_cast<std::size_t>(it - cells.begin()));
      }
      return;
    }
    if (cells.size() <= *std::max_element(cols.begin(), cols.end()))
      throw ParseError(where(source, line_no) + "expected " + std::to_string(cols.size()) + " columns", line_no);
    out.push_back(make_delta(cells[cols[0]], cells[cols[1]], parse_number(cells[cols[2]], "with_score", source, line_no),
                             parse_number(cells[cols[3]], "skip_score", source, line_no), source, line_no));
  });
  return out;
}

std::vector<MetricDelta> load_deltas(const std::filesystem::path& path) {
  return parse_deltas(util::read_file(path), path.string());
}

}  // namespace tae
