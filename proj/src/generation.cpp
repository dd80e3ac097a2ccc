#include "tae/generation.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/util.hpp"

namespace tae {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kIrInstruction =
    "Given the input text, extract the document title and authors. "
    "For each section in the given input text, extract the most important sentences.";
constexpr std::string_view kIrSchemaLead = " Format the output using the following JSON template:\n";

const std::string& slides_style() {
  static const std::string s =
      "Slides should include a title page. Following slides should contain an informative slide "
      "title and short, concise bullet points. Longer slides should be broken up into multiple slides.";
  return s;
}
const std::string& poster_style() {
  static const std::string s =
      "Posters should include a title section at the top. Each panel should include a heading and "
      "short, concise bullet points of the most important take-aways from that section.";
  return s;
}
const std::string& blog_style() {
  static const std::string s =
      "Blogs should include paragraphs introducing the topic, a summary of the input document, and "
      "important takeaways. The blog should be more readable to a general audience than the input "
      "document.";
  return s;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// End offset of the balanced {...} starting at pos, aware of JSON strings.
std::optional<std::size_t> balanced_object_end(std::string_view s, std::size_t pos) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = pos; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::nullopt;
}

std::optional<IntermediateRepresentation> from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  if (!j.contains("title") && !j.contains("authors") && !j.contains("sections")) return std::nullopt;
  IntermediateRepresentation ir;
  if (auto it = j.find("title"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) return std::nullopt;
    ir.title = it->get<std::string>();
  }
  if (auto it = j.find("authors"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      ir.authors.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& a : *it) {
        if (!a.is_string()) return std::nullopt;
        ir.authors.push_back(a.get<std::string>());
      }
    } else {
      return std::nullopt;
    }
  }
  if (auto it = j.find("sections"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) return std::nullopt;
    for (const auto& s : *it) {
      if (!s.is_object()) return std::nullopt;
      IrSection sec;
      if (auto h = s.find("heading"); h != s.end() && !h->is_null()) {
        if (!h->is_string()) return std::nullopt;
        sec.heading = h->get<std::string>();
      }
      if (auto ss = s.find("sentences"); ss != s.end() && !ss->is_null()) {
        if (!ss->is_array()) return std::nullopt;
        for (const auto& x : *ss) {
          if (!x.is_string()) return std::nullopt;
          sec.sentences.push_back(x.get<std::string>());
        }
      }
      ir.sections.push_back(std::move(sec));
    }
  }
  return ir;
}

std::string strip_structure_chars(std::string_view line) {
  std::string out;
  for (char c : line) {
    if (c == '{' || c == '}' || c == '[' || c == ']' || c == '"' || c == '`') continue;
    out.push_back(c);
  }
  return util::trim(out);
}

// Body of a ```latex / ```tex fence when the answer is wrapped in one.
std::string unfence_latex(std::string_view output) {
  for (std::string_view tag : {"```latex", "```tex", "```"}) {
    const auto open = output.find(tag);
    if (open == std::string_view::npos) continue;
    const auto body = output.find('\n', open);
    if (body == std::string_view::npos) continue;
    const auto close = output.find("```", body);
    if (close == std::string_view::npos) continue;
    const auto inner = output.substr(body + 1, close - body - 1);
    if (inner.find('\\') != std::string_view::npos) return std::string(inner);
  }
  return std::string(output);
}

std::string run_step(const char* step, const std::string& prompt, const GenerationConfig& cfg,
                     CompletionClient& client, std::vector<StepRecord>& trace) {
  StepRecord rec;
  rec.step = step;
  rec.prompt = prompt;
  rec.prompt_tokens = count_tokens(prompt, cfg.chars_per_token);
  const CompletionRequest req{cfg.model, prompt, cfg.temperature, cfg.max_output_tokens};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    rec.output = with_retries(cfg.retry, [&] { return client.complete(req); }, &rec.attempts);
  } catch (const ProviderError& e) {
    throw ProviderError(std::string("step '") + step + "' failed after " + std::to_string(rec.attempts) +
                            " attempt(s): " + e.what(),
                        e.retryable());
  }
  rec.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rec.output_tokens = count_tokens(rec.output, cfg.chars_per_token);
  trace.push_back(rec);
  return rec.output;
}

}  // namespace

std::string serialize_ir(const IntermediateRepresentation& ir) {
  ojson j;
  j["title"] = ir.title;
  j["authors"] = ir.authors;
  auto& secs = j["sections"] = ojson::array();
  for (const auto& s : ir.sections) {
    ojson o;
    o["heading"] = s.heading;
    o["sentences"] = s.sentences;
    secs.push_back(std::move(o));
  }
  return j.dump(2);
}

const std::string& ir_schema() {
  static const std::string schema = serialize_ir(IntermediateRepresentation{
      "<document title>", {"<author>"}, {IrSection{"<section heading>", {"<important sentence>"}}}});
  return schema;
}

std::optional<std::string> find_structured_block(std::string_view output) {
  for (auto fence = output.find("```"); fence != std::string_view::npos;) {
    const auto line_end = output.find('\n', fence);
    if (line_end == std::string_view::npos) break;
    const auto close = output.find("```", line_end);
    if (close == std::string_view::npos) break;
    const auto inner = util::trim(output.substr(line_end + 1, close - line_end - 1));
    if (!inner.empty() && inner.front() == '{') return inner;
    fence = output.find("```", close + 3);
  }
  const auto open = output.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  if (auto end = balanced_object_end(output, open)) return std::string(output.substr(open, *end - open));
  return std::nullopt;
}

IntermediateRepresentation parse_ir(std::string_view model_output, bool strict) {
  if (auto block = find_structured_block(model_output)) {
    auto j = nlohmann::json::parse(*block, nullptr, false);
    if (!j.is_discarded()) {
      if (auto ir = from_json(j)) return *ir;
    }
  }
  if (strict) throw IrParseError("model output holds no parseable representation");
  IntermediateRepresentation ir;
  IrSection sec;
  std::size_t start = 0;
  while (start < model_output.size()) {
    auto nl = model_output.find('\n', start);
    if (nl == std::string_view::npos) nl = model_output.size();
    auto line = strip_structure_chars(model_output.substr(start, nl - start));
    if (!line.empty()) sec.sentences.push_back(std::move(line));
    start = nl + 1;
  }
  ir.sections.push_back(std::move(sec));
  return ir;
}

std::string flatten_ir(const IntermediateRepresentation& ir) {
  std::string out;
  auto line = [&](const std::string& s) {
    if (s.empty()) return;
    out += s;
    out.push_back('\n');
  };
  line(ir.title);
  std::string authors;
  for (const auto& a : ir.authors) {
    if (a.empty()) continue;
    if (!authors.empty()) authors += ", ";
    authors += a;
  }
  line(authors);
  for (const auto& s : ir.sections) {
    line(s.heading);
    for (const auto& x : s.sentences) line(x);
  }
  return out;
}

std::string_view to_string(RepresentationMode m) noexcept {
  switch (m) {
    case RepresentationMode::NoRep: return "none";
    case RepresentationMode::OwnRep: return "own";
    case RepresentationMode::TextRep: return "text";
    case RepresentationMode::JsonRep: return "json";
  }
  return "none";
}

RepresentationMode parse_rep_mode(std::string_view text) {
  for (auto m : {RepresentationMode::NoRep, RepresentationMode::OwnRep, RepresentationMode::TextRep,
                 RepresentationMode::JsonRep}) {
    if (text == to_string(m)) return m;
  }
  throw ValidationError("unknown representation mode '" + std::string(text) +
                        "' (expected none|own|text|json)");
}

StyleParameter StyleParameter::defaults(const TemplateKind& t) {
  switch (t.kind()) {
    case TemplateKind::Kind::Slides: return {t, slides_style()};
    case TemplateKind::Kind::Poster: return {t, poster_style()};
    case TemplateKind::Kind::Blog: return {t, blog_style()};
    case TemplateKind::Kind::Custom: break;
  }
  throw ValidationError("template '" + t.name() + "' has no built-in style; set style_description");
}

void GenerationConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 1.0))
    throw ValidationError("temperature must be in [0, 1], got " + std::to_string(temperature));
  if (max_input_tokens < 1) throw ValidationError("max_input_tokens must be >= 1");
  if (chars_per_token < 1) throw ValidationError("chars_per_token must be >= 1");
  if (max_output_tokens < 1) throw ValidationError("max_output_tokens must be >= 1");
  if (retry.max_attempts < 1) throw ValidationError("retry attempts must be >= 1");
  if (style) (void)style_parameter();
}

std::optional<StyleParameter> GenerationConfig::style_parameter() const {
  if (!style) return std::nullopt;
  if (!style_description.empty()) return StyleParameter{template_kind, style_description};
  return StyleParameter::defaults(template_kind);
}

std::size_t count_tokens(std::string_view text, std::size_t chars_per_token) {
  if (chars_per_token == 0) chars_per_token = 1;
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) total += std::max<std::size_t>(1, (j - i + chars_per_token - 1) / chars_per_token);
    i = j;
  }
  return total;
}

std::string truncate_to_window(std::string_view text, std::size_t token_budget, std::size_t chars_per_token) {
  if (chars_per_token == 0) chars_per_token = 1;
  std::size_t used = 0;
  std::size_t keep = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;
    used += std::max<std::size_t>(1, (j - i + chars_per_token - 1) / chars_per_token);
    if (used > token_budget) return std::string(text.substr(0, keep));
    keep = j;
    i = j;
  }
  return std::string(text);
}

std::string build_ir_prompt(std::string_view document, bool include_schema, std::size_t token_budget,
                            std::size_t chars_per_token) {
  std::string p(kIrInstruction);
  if (include_schema) {
    p += kIrSchemaLead;
    p += ir_schema();
  }
  p += "\n\nInput: ";
  p += truncate_to_window(document, token_budget, chars_per_token);
  p += "\nOutput:";
  return p;
}

std::string template_type_word(const TemplateKind& t) {
  switch (t.kind()) {
    case TemplateKind::Kind::Slides: return "slide deck";
    case TemplateKind::Kind::Poster: return "poster";
    case TemplateKind::Kind::Blog: return "blog post";
    case TemplateKind::Kind::Custom: break;
  }
  return t.name();
}

std::string build_view_prompt(std::string_view input, const TemplateKind& t,
                              const std::optional<StyleParameter>& style) {
  std::string p = "Summarize the following input in a " + template_type_word(t) + " style.";
  if (style) p += " Style parameters: " + style->description;
  p += " Format the output document as a latex file:\nInput: ";
  p += input;
  p += "\n\nOutput:";
  return p;
}

std::string ensure_latex_document(std::string_view text) {
  if (text.find("\\begin{document}") != std::string_view::npos) return std::string(text);
  std::string out = "\\begin{document}\n";
  out += text;
  if (!text.empty() && text.back() != '\n') out.push_back('\n');
  out += "\\end{document}\n";
  return out;
}

GenerationResult generate_view(std::string_view document, const GenerationConfig& config,
                               CompletionClient& client) {
  config.validate();
  GenerationResult result;
  const auto style = config.style_parameter();
  std::string view_input;
  if (config.mode == RepresentationMode::NoRep) {
    view_input = truncate_to_window(document, config.max_input_tokens, config.chars_per_token);
  } else {
    const bool schema = config.mode != RepresentationMode::OwnRep;
    const auto answer = run_step("representation",
                                 build_ir_prompt(document, schema, config.max_input_tokens, config.chars_per_token),
                                 config, client, result.trace);
    const bool strict = config.strict_ir && config.mode == RepresentationMode::JsonRep;
    result.ir = parse_ir(answer, strict);
    if (config.mode == RepresentationMode::TextRep) {
      view_input = flatten_ir(*result.ir);
    } else {
      view_input = find_structured_block(answer).value_or(answer);
    }
  }
  const auto answer =
      run_step("view", build_view_prompt(view_input, config.template_kind, style), config, client, result.trace);
  result.latex = ensure_latex_document(unfence_latex(answer));
  return result;
}

std::vector<GenerationResult> generate_batch(std::span<const std::string> documents,
                                             const GenerationConfig& config, CompletionClient& client,
                                             std::size_t jobs) {
  config.validate();
  std::vector<GenerationResult> results(documents.size());
  std::vector<std::exception_ptr> errors(documents.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < documents.size(); i = next++) {
      try {
        results[i] = generate_view(documents[i], config, client);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::max<std::size_t>(1, std::min(jobs, documents.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace tae
