#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/panel_extract.hpp"
#include "tae/util.hpp"

namespace tae {
namespace {

using ojson = nlohmann::ordered_json;

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

// Calls f(json, line_number) for every non-blank line.
template <class F>
void for_each_record(std::string_view contents, const std::string& source, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    ++line_no;
    const auto line = util::trim(contents.substr(start, nl - start));
    start = nl + 1;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where(source, line_no) + "invalid JSON: " + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError(where(source, line_no) + "record is not an object", line_no);
    f(j, line_no);
  }
}

std::string required_string(const nlohmann::json& j, const char* field, const std::string& source,
                            std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null())
    throw MissingField(where(source, line) + "missing field '" + field + "'", line);
  if (!it->is_string())
    throw ParseError(where(source, line) + "field '" + field + "' must be a string", line);
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* field,
                                           const std::string& source, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ParseError(where(source, line) + "field '" + field + "' must be a string", line);
  return it->get<std::string>();
}

std::optional<std::vector<std::string>> optional_strings(const nlohmann::json& j, const char* field,
                                                         const std::string& source, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  std::vector<std::string> out;
  bool ok = it->is_array();
  if (ok) {
    for (const auto& v : *it) {
      if (!v.is_string()) {
        ok = false;
        break;
      }
      out.push_back(v.get<std::string>());
    }
  }
  if (!ok)
    throw ParseError(where(source, line) + "field '" + field + "' must be a list of strings", line);
  return out;
}

template <class Fn>
auto field_value(const std::string& source, std::size_t line, const char* field, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ParseError(where(source, line) + "field '" + field + "': " + e.what(), line);
  }
}

}  // namespace

std::vector<CorpusRecord> parse_corpus(std::string_view contents, const std::string& source_name) {
  std::vector<CorpusRecord> out;
  std::unordered_set<std::string> seen;
  for_each_record(contents, source_name, [&](const nlohmann::json& j, std::size_t line) {
    CorpusRecord rec;
    rec.id = required_string(j, "id", source_name, line);
    const auto tmpl = required_string(j, "template", source_name, line);
    rec.template_kind = field_value(source_name, line, "template", [&] { return TemplateKind::parse(tmpl); });
    rec.input_text = optional_string(j, "input_text", source_name, line);
    rec.reference_panels =
        optional_strings(j, "reference_panels", source_name, line).value_or(std::vector<std::string>{});
    if (!seen.insert(rec.id).second)
      throw DuplicateId(where(source_name, line) + "duplicate id '" + rec.id + "'", line);
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(util::read_file(path), path.string());
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& r : records) {
    ojson j;
    j["id"] = r.id;
    j["template"] = r.template_kind.to_string();
    if (r.input_text) j["input_text"] = *r.input_text;
    j["reference_panels"] = r.reference_panels;
    os << j.dump() << '\n';
  }
  util::write_file_atomic(path, os.str());
}

std::vector<GeneratedRecord> parse_generated(std::string_view contents, const std::string& source_name) {
  std::vector<GeneratedRecord> out;
  std::unordered_set<std::string> seen;
  for_each_record(contents, source_name, [&](const nlohmann::json& j, std::size_t line) {
    GeneratedRecord rec;
    rec.id = required_string(j, "id", source_name, line);
    const auto tmpl = required_string(j, "template", source_name, line);
    rec.template_kind = field_value(source_name, line, "template", [&] { return TemplateKind::parse(tmpl); });
    if (auto fmt = optional_string(j, "format", source_name, line)) {
      rec.format = field_value(source_name, line, "format", [&] { return parse_source_format(*fmt); });
    } else {
      rec.format = default_format(rec.template_kind);
    }
    rec.text = optional_string(j, "text", source_name, line).value_or("");
    rec.panels = optional_strings(j, "panels", source_name, line);
    rec.variant = optional_string(j, "variant", source_name, line).value_or("");
    if (!j.contains("text") && !rec.panels)
      throw MissingField(where(source_name, line) + "record needs 'text' or 'panels'", line);
    if (!seen.insert(rec.id).second)
      throw DuplicateId(where(source_name, line) + "duplicate id '" + rec.id + "'", line);
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<GeneratedRecord> load_generated(const std::filesystem::path& path) {
  return parse_generated(util::read_file(path), path.string());
}

std::string serialize_generated(const std::vector<GeneratedRecord>& records) {
  std::ostringstream os;
  for (const auto& r : records) {
    ojson j;
    j["id"] = r.id;
    j["template"] = r.template_kind.to_string();
    j["format"] = std::string(to_string(r.format));
    j["text"] = r.text;
    if (r.panels) j["panels"] = *r.panels;
    if (!r.variant.empty()) j["variant"] = r.variant;
    os << j.dump() << '\n';
  }
  return os.str();
}

void save_generated(const std::vector<GeneratedRecord>& records, const std::filesystem::path& path) {
  util::write_file_atomic(path, serialize_generated(records));
}

Extraction generated_panels(const GeneratedRecord& rec, const TokenizerConfig& cfg) {
  if (rec.panels) {
    Extraction ex;
    ex.sequence = make_sequence(*rec.panels, Role::Generated, rec.template_kind, cfg);
    return ex;
  }
  return extract_panels(rec.text, rec.template_kind, rec.format, cfg, Role::Generated);
}

void save_panels(const PanelSequence& sequence, const std::filesystem::path& path) {
  ojson j;
  j["role"] = std::string(to_string(sequence.role));
  j["template"] = sequence.template_kind.to_string();
  auto& arr = j["panels"] = ojson::array();
  for (const auto& p : sequence.panels) arr.push_back(p.text);
  util::write_file_atomic(path, j.dump(2) + "\n");
}

PanelSequence load_panels(const std::filesystem::path& path, const TokenizerConfig& cfg) {
  const auto contents = util::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what(), 1);
  }
  const std::string src = path.string();
  if (!j.is_object()) throw ParseError(src + ": panel file is not an object", 1);
  const auto role = field_value(src, 1, "role", [&] { return parse_role(required_string(j, "role", src, 1)); });
  const auto tmpl = field_value(src, 1, "template",
                                [&] { return TemplateKind::parse(required_string(j, "template", src, 1)); });
  auto panels = optional_strings(j, "panels", src, 1);
  if (!panels) throw MissingField(src + ": missing field 'panels'", 1);
  return make_sequence(*panels, role, tmpl, cfg);
}

std::string panel_dump(const PanelSequence& sequence) {
  std::string out;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i) out += "\n===\n";
    out += sequence[i].text;
  }
  return out;
}

std::vector<std::string> parse_panel_dump(std::string_view dump) {
  std::vector<std::string> out;
  if (dump.empty()) return out;
  constexpr std::string_view delim = "\n===\n";
  std::size_t start = 0;
  for (;;) {
    const auto pos = dump.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(dump.substr(start));
      return out;
    }
    out.emplace_back(dump.substr(start, pos - start));
    start = pos + delim.size();
  }
}

}  // namespace tae
