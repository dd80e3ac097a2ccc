#include "tae/panel_extract.hpp"

#include <cctype>
#include <regex>
#include <unordered_set>

#include "tae/error.hpp"
#include "tae/latex.hpp"

namespace tae {
namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string collapse(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string join_nonempty(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool blank(std::string_view line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

// Replaces \titlepage and \maketitle in the body with the title and author
// arguments found anywhere in the document.
std::string expand_title_commands(std::string_view clean_doc, std::string_view body) {
  std::string replacement = "\n";
  if (auto t = latex::command_argument(clean_doc, "title")) replacement += *t + " ";
  if (auto a = latex::command_argument(clean_doc, "author")) replacement += *a;
  replacement += "\n";
  std::string out(body);
  for (std::string_view cmd : {"\\titlepage", "\\maketitle"}) {
    for (auto pos = out.find(cmd); pos != std::string::npos; pos = out.find(cmd, pos)) {
      const auto after = pos + cmd.size();
      if (after < out.size() && is_letter(out[after])) {
        pos = after;
        continue;
      }
      out.replace(pos, cmd.size(), replacement);
      pos += replacement.size();
    }
  }
  return out;
}

std::vector<std::string> latex_paragraphs(std::string_view body) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto stripped = latex::strip_latex(cur);
    if (!stripped.empty()) out.push_back(std::move(stripped));
    cur.clear();
  };
  for (const auto& line : split_lines(body)) {
    if (blank(line)) {
      flush();
    } else {
      cur += line;
      cur.push_back('\n');
    }
  }
  flush();
  return out;
}

struct LatexSource {
  std::string clean;  // comment-free document
  std::string body;   // document body with title commands expanded
};

LatexSource prepare_latex(std::string_view document) {
  LatexSource src;
  src.clean = latex::remove_comments(document);
  src.body = expand_title_commands(src.clean, latex::document_body(src.clean));
  return src;
}

// Panel text of one frame: title (environment argument, \frametitle,
// \framesubtitle) followed by the body.
std::string frame_text(std::string_view inner) {
  std::string title;
  std::size_t i = 0;
  while (i < inner.size() && std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
  while (i < inner.size() && inner[i] == '[') {
    i = latex::skip_group(inner, i);
    while (i < inner.size() && std::isspace(static_cast<unsigned char>(inner[i]))) ++i;
  }
  if (i < inner.size() && inner[i] == '{') {
    const auto close = latex::skip_group(inner, i);
    title = std::string(inner.substr(i + 1, close - i - 2));
    i = close;
  }
  std::string rest(inner.substr(i));
  for (std::string_view cmd : {"frametitle", "framesubtitle"}) {
    const std::string needle = "\\" + std::string(cmd);
    auto pos = rest.find(needle);
    if (pos == std::string::npos) continue;
    if (auto arg = latex::command_argument(std::string_view(rest).substr(pos), cmd)) {
      title = join_nonempty(title, *arg);
      auto brace = rest.find('{', pos);
      auto end = latex::skip_group(rest, brace);
      rest.erase(pos, end - pos);
    }
  }
  return join_nonempty(latex::strip_latex(title), latex::strip_latex(rest));
}

std::optional<std::vector<std::string>> latex_frames(std::string_view body) {
  const auto tokens = latex::scan_environments(body);
  std::vector<std::string> panels;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (!tokens[k].opening || tokens[k].name != "frame") continue;
    int depth = 0;
    std::size_t close = k;
    for (std::size_t m = k + 1; m < tokens.size(); ++m) {
      if (tokens[m].name != "frame") continue;
      if (tokens[m].opening) {
        ++depth;
      } else if (depth-- == 0) {
        close = m;
        break;
      }
    }
    if (close == k) return std::nullopt;
    panels.push_back(frame_text(body.substr(tokens[k].end, tokens[close].begin - tokens[k].end)));
    k = close;
  }
  if (panels.empty()) return std::nullopt;
  return panels;
}

bool is_block_env(std::string_view name) {
  static const std::unordered_set<std::string_view> envs = {
      "block", "alertblock", "exampleblock", "tcolorbox", "posterbox", "textblock", "abstract"};
  return envs.contains(name);
}

bool is_sectioning(std::string_view name) {
  static const std::unordered_set<std::string_view> cmds = {
      "part", "chapter", "section", "subsection", "subsubsection", "block"};
  return cmds.contains(name);
}

std::optional<std::vector<std::string>> latex_sections(std::string_view body) {
  std::vector<std::size_t> starts;
  int block_depth = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\') continue;
    if (i + 1 < body.size() && !is_letter(body[i + 1])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < body.size() && is_letter(body[j])) ++j;
    const std::string_view name = body.substr(i + 1, j - i - 1);
    if (name == "begin" || name == "end") {
      std::size_t b = j;
      while (b < body.size() && std::isspace(static_cast<unsigned char>(body[b]))) ++b;
      if (b < body.size() && body[b] == '{') {
        const auto close = body.find('}', b);
        if (close != std::string_view::npos && is_block_env(body.substr(b + 1, close - b - 1))) {
          if (name == "begin") {
            if (block_depth == 0) starts.push_back(i);
            ++block_depth;
          } else if (block_depth > 0) {
            --block_depth;
          }
        }
      }
    } else if (is_sectioning(name) && block_depth == 0) {
      starts.push_back(i);
    }
    i = j - 1;
  }
  if (starts.empty()) return std::nullopt;

  std::vector<std::string> panels;
  if (auto lead = latex::strip_latex(body.substr(0, starts.front())); !lead.empty())
    panels.push_back(std::move(lead));
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto end = k + 1 < starts.size() ? starts[k + 1] : body.size();
    panels.push_back(latex::strip_latex(body.substr(starts[k], end - starts[k])));
  }
  return panels;
}

bool md_heading(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && line[i] == '#') ++i;
  return i >= 1 && i <= 6 && (i == line.size() || line[i] == ' ');
}

bool md_rule(std::string_view line) {
  static const std::regex re(R"(^\s*(-{3,}|\*{3,}|_{3,})\s*$)");
  return std::regex_match(line.begin(), line.end(), re);
}

std::optional<std::vector<std::string>> markdown_units(std::string_view text, bool split_on_rules) {
  std::vector<std::string> panels;
  std::string cur;
  bool saw_boundary = false;
  auto flush = [&] {
    auto s = strip_markdown(cur);
    if (!s.empty()) panels.push_back(std::move(s));
    cur.clear();
  };
  for (const auto& line : split_lines(text)) {
    if (md_heading(line)) {
      saw_boundary = true;
      flush();
      cur = line + "\n";
    } else if (split_on_rules && md_rule(line)) {
      saw_boundary = true;
      flush();
    } else {
      cur += line;
      cur.push_back('\n');
    }
  }
  flush();
  if (!saw_boundary) return std::nullopt;
  return panels;
}

std::vector<std::string> markdown_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  for (auto& p : split_plain(text)) {
    auto s = strip_markdown(p);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::string_view to_string(SourceFormat f) noexcept {
  switch (f) {
    case SourceFormat::LatexBeamer: return "latex-beamer";
    case SourceFormat::LatexGeneric: return "latex";
    case SourceFormat::PlainText: return "plain";
    case SourceFormat::MarkdownLike: return "markdown";
  }
  return "plain";
}

SourceFormat parse_source_format(std::string_view text) {
  for (auto f : {SourceFormat::LatexBeamer, SourceFormat::LatexGeneric, SourceFormat::PlainText,
                 SourceFormat::MarkdownLike}) {
    if (text == to_string(f)) return f;
  }
  throw ValidationError("unknown source format '" + std::string(text) +
                        "' (expected latex-beamer|latex|plain|markdown)");
}

SourceFormat default_format(const TemplateKind& t) noexcept {
  return t.rule() == PanelRule::PerFrame ? SourceFormat::LatexBeamer : SourceFormat::LatexGeneric;
}

std::string strip_latex(std::string_view text) { return latex::strip_latex(text); }

std::vector<std::string> split_plain(std::string_view text) {
  const auto lines = split_lines(text);
  static const std::regex delim(R"(^\s*===\s*$)");
  bool delimited = false;
  for (const auto& l : lines) {
    if (std::regex_match(l, delim)) {
      delimited = true;
      break;
    }
  }
  std::vector<std::string> out;
  std::string cur;
  if (delimited) {
    for (const auto& l : lines) {
      if (std::regex_match(l, delim)) {
        out.push_back(collapse(cur));
        cur.clear();
      } else {
        cur += l;
        cur.push_back('\n');
      }
    }
    out.push_back(collapse(cur));
    return out;
  }
  for (const auto& l : lines) {
    if (blank(l)) {
      if (auto p = collapse(cur); !p.empty()) out.push_back(std::move(p));
      cur.clear();
    } else {
      cur += l;
      cur.push_back('\n');
    }
  }
  if (auto p = collapse(cur); !p.empty()) out.push_back(std::move(p));
  return out;
}

std::string strip_markdown(std::string_view text) {
  static const std::regex heading(R"(^\s{0,3}#{1,6}\s*)");
  static const std::regex bullet(R"(^\s*([-*+]|\d+[.)])\s+)");
  static const std::regex quote(R"(^\s*>\s?)");
  static const std::regex image(R"(!\[([^\]]*)\]\([^)]*\))");
  static const std::regex link(R"(\[([^\]]*)\]\([^)]*\))");
  static const std::regex emphasis(R"(\*+|`+|(^|\s)_+|_+(\s|$))");
  std::string joined;
  for (const auto& raw : split_lines(text)) {
    if (md_rule(raw)) continue;
    std::string line = std::regex_replace(raw, heading, "");
    line = std::regex_replace(line, quote, "");
    line = std::regex_replace(line, bullet, "");
    line = std::regex_replace(line, image, "$1");
    line = std::regex_replace(line, link, "$1");
    line = std::regex_replace(line, emphasis, "$1$2");
    joined += line;
    joined.push_back('\n');
  }
  return collapse(joined);
}

Extraction extract_panels(std::string_view document, const TemplateKind& template_kind,
                          SourceFormat format, const TokenizerConfig& cfg, Role role) {
  Extraction ex;
  std::vector<std::string> texts;
  const PanelRule rule = template_kind.rule();
  const bool is_latex = format == SourceFormat::LatexBeamer || format == SourceFormat::LatexGeneric;

  auto degrade = [&](std::string why, std::vector<std::string> fallback) {
    ex.degraded = true;
    ex.warnings.push_back(std::move(why) + "; fell back to plain-text splitting");
    texts = std::move(fallback);
  };

  if (is_latex) {
    const auto problem = latex::structure_problem(document);
    const auto src = prepare_latex(document);
    if (rule == PanelRule::WholeDocument) {
      if (problem) ex.warnings.push_back(*problem);
      texts = {latex::strip_latex(src.body)};
    } else if (problem) {
      degrade(*problem, latex_paragraphs(src.body));
    } else if (rule == PanelRule::PerFrame) {
      if (auto frames = latex_frames(src.body)) {
        texts = std::move(*frames);
      } else {
        degrade("no frame environments found", latex_paragraphs(src.body));
      }
    } else if (rule == PanelRule::PerSection) {
      if (auto sections = latex_sections(src.body)) {
        texts = std::move(*sections);
      } else {
        degrade("no sections or blocks found", latex_paragraphs(src.body));
      }
    } else {
      texts = latex_paragraphs(src.body);
    }
  } else if (format == SourceFormat::MarkdownLike) {
    if (rule == PanelRule::WholeDocument) {
      texts = {strip_markdown(document)};
    } else if (rule == PanelRule::PerParagraph) {
      texts = markdown_paragraphs(document);
    } else if (auto units = markdown_units(document, rule == PanelRule::PerFrame)) {
      texts = std::move(*units);
    } else {
      degrade("no headings found", markdown_paragraphs(document));
    }
  } else {
    if (rule == PanelRule::WholeDocument) {
      texts = {collapse(document)};
    } else {
      texts = split_plain(document);
    }
  }

  // A whole-document template is one panel no matter what the fallback produced.
  if (rule == PanelRule::WholeDocument && texts.size() != 1) {
    std::string all;
    for (const auto& t : texts) all = join_nonempty(all, t);
    texts = {all};
  }
  ex.sequence = make_sequence(texts, role, template_kind, cfg);
  return ex;
}

}  // namespace tae
