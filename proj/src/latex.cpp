#include "tae/latex.hpp"

#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace tae::latex {
namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Commands whose leading mandatory arguments carry no prose. The count is
// how many mandatory arguments to discard; later arguments are kept.
const std::unordered_map<std::string_view, int>& dropped_arguments() {
  static const std::unordered_map<std::string_view, int> table = {
      {"usepackage", 1}, {"RequirePackage", 1}, {"documentclass", 1}, {"includegraphics", 1},
      {"label", 1}, {"ref", 1}, {"eqref", 1}, {"cref", 1}, {"Cref", 1}, {"autoref", 1},
      {"pageref", 1}, {"cite", 1}, {"citep", 1}, {"citet", 1}, {"citealp", 1}, {"nocite", 1},
      {"url", 1}, {"vspace", 1}, {"hspace", 1}, {"setlength", 2}, {"addtolength", 2},
      {"usetheme", 1}, {"usecolortheme", 1}, {"usefonttheme", 1}, {"useinnertheme", 1},
      {"useoutertheme", 1}, {"setbeamertemplate", 2}, {"setbeamercolor", 2},
      {"setbeamerfont", 2}, {"definecolor", 3}, {"newcommand", 2}, {"renewcommand", 2},
      {"providecommand", 2}, {"newenvironment", 3}, {"renewenvironment", 3},
      {"bibliography", 1}, {"bibliographystyle", 1}, {"pagestyle", 1}, {"thispagestyle", 1},
      {"color", 1}, {"textcolor", 1}, {"colorbox", 1}, {"href", 1}, {"input", 1},
      {"include", 1}, {"geometry", 1}, {"graphicspath", 1}, {"hypersetup", 1},
      {"newtheorem", 2}, {"pgfplotsset", 1}, {"tikzset", 1}, {"usetikzlibrary", 1},
      {"setcounter", 2}, {"addtocounter", 2}, {"resizebox", 2}, {"scalebox", 1}, {"rule", 2},
      {"fontsize", 2}, {"linespread", 1}, {"titlegraphic", 1}, {"logo", 1},
      {"setbeamersize", 1}, {"selectfont", 0}, {"bibitem", 1}, {"addbibresource", 1},
  };
  return table;
}

// Environments whose opening carries non-prose mandatory arguments.
const std::unordered_map<std::string_view, int>& env_arguments() {
  static const std::unordered_map<std::string_view, int> table = {
      {"tabular", 1}, {"tabularx", 2}, {"array", 1}, {"minipage", 1}, {"column", 1},
      {"multicols", 1}, {"thebibliography", 1}, {"wrapfigure", 2}, {"tabulary", 2},
  };
  return table;
}

// Environments dropped with their content.
const std::unordered_set<std::string_view>& dropped_environments() {
  static const std::unordered_set<std::string_view> envs = {"tikzpicture", "comment", "pgfpicture"};
  return envs;
}

std::size_t skip_spaces(std::string_view s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

// Skips any number of [..] groups directly after position i (whitespace allowed).
std::size_t skip_optionals(std::string_view s, std::size_t i) {
  while (true) {
    const std::size_t j = skip_spaces(s, i);
    if (j < s.size() && s[j] == '[') {
      i = skip_group(s, j);
    } else {
      return i;
    }
  }
}

// Skips one mandatory argument: a {group}, a control sequence or one char.
std::size_t skip_mandatory(std::string_view s, std::size_t i) {
  i = skip_spaces(s, i);
  if (i >= s.size()) return i;
  if (s[i] == '{') return skip_group(s, i);
  if (s[i] == '\\') {
    ++i;
    if (i < s.size() && is_letter(s[i])) {
      while (i < s.size() && is_letter(s[i])) ++i;
      return i;
    }
    return std::min(i + 1, s.size());
  }
  return i + 1;
}

std::size_t read_name(std::string_view s, std::size_t i, std::string& name) {
  name.clear();
  while (i < s.size() && is_letter(s[i])) name.push_back(s[i++]);
  if (i < s.size() && s[i] == '*') ++i;
  return i;
}

// Reads "{name}" at i (after optional spaces). Returns npos on failure.
std::size_t read_braced_name(std::string_view s, std::size_t i, std::string& name) {
  i = skip_spaces(s, i);
  if (i >= s.size() || s[i] != '{') return std::string_view::npos;
  const auto close = s.find('}', i);
  if (close == std::string_view::npos) return std::string_view::npos;
  name = std::string(s.substr(i + 1, close - i - 1));
  return close + 1;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::size_t skip_group(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return text.size();
  const char open = text[pos];
  const char close = open == '[' ? ']' : '}';
  int brace_depth = 0;
  for (std::size_t i = pos + 1; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (c == '{') {
      ++brace_depth;
    } else if (c == '}') {
      if (open == '{' && brace_depth == 0) return i + 1;
      --brace_depth;
    } else if (c == close && brace_depth == 0) {
      return i + 1;
    }
  }
  return text.size();
}

std::string remove_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size()) {
      out.push_back(c);
      out.push_back(text[++i]);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
      if (i < text.size()) out.push_back('\n');
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<EnvToken> scan_environments(std::string_view text) {
  std::vector<EnvToken> out;
  std::string name;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') continue;
    if (i + 1 < text.size() && !is_letter(text[i + 1])) {
      ++i;
      continue;
    }
    const std::size_t after = read_name(text, i + 1, name);
    if (name != "begin" && name != "end") {
      i = after - 1;
      continue;
    }
    const bool opening = name == "begin";
    std::string env;
    const std::size_t end = read_braced_name(text, after, env);
    if (end == std::string_view::npos) {
      i = after - 1;
      continue;
    }
    out.push_back({i, end, opening, env});
    i = end - 1;
  }
  return out;
}

std::optional<std::string> structure_problem(std::string_view text) {
  const std::string clean = remove_comments(text);
  long depth = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const char c = clean[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth < 0) return "unbalanced braces: unexpected '}'";
  }
  if (depth != 0) return "unbalanced braces: " + std::to_string(depth) + " unclosed '{'";

  std::vector<std::string> stack;
  for (const auto& tok : scan_environments(clean)) {
    if (tok.opening) {
      stack.push_back(tok.name);
    } else if (stack.empty() || stack.back() != tok.name) {
      return "environment mismatch: \\end{" + tok.name + "}" +
             (stack.empty() ? std::string(" without \\begin") : " closes \\begin{" + stack.back() + "}");
    } else {
      stack.pop_back();
    }
  }
  if (!stack.empty()) return "environment \\begin{" + stack.back() + "} is never closed";
  return std::nullopt;
}

std::string_view document_body(std::string_view text) {
  constexpr std::string_view begin_doc = "\\begin{document}";
  constexpr std::string_view end_doc = "\\end{document}";
  const auto b = text.find(begin_doc);
  if (b == std::string_view::npos) return text;
  const auto start = b + begin_doc.size();
  const auto e = text.find(end_doc, start);
  return text.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start);
}

std::optional<std::string> command_argument(std::string_view text, std::string_view name) {
  const std::string needle = "\\" + std::string(name);
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + 1)) {
    const std::size_t after = pos + needle.size();
    if (after < text.size() && is_letter(text[after])) continue;  // longer command name
    std::size_t i = skip_spaces(text, skip_optionals(text, after));
    if (i < text.size() && text[i] == '{') {
      const std::size_t close = skip_group(text, i);
      return std::string(text.substr(i + 1, close - i - 2));
    }
  }
  return std::nullopt;
}

std::string strip_latex(std::string_view input) {
  const std::string text = remove_comments(input);
  const std::string_view s = text;
  std::string out;
  out.reserve(s.size());
  std::string name;

  for (std::size_t i = 0; i < s.size();) {
    const char c = s[i];
    if (c == '\\') {
      if (i + 1 >= s.size()) break;
      const char n = s[i + 1];
      if (!is_letter(n)) {
        switch (n) {
          case '\\':
            out.push_back(' ');
            i = skip_optionals(s, i + 2);
            continue;
          case '%': case '&': case '#': case '_': case '$': case '{': case '}':
            out.push_back(n);
            break;
          case '\'': case '"': case '^': case '`': case '~': case '=': case '.':
            break;  // accent; the accented letter follows
          default:
            out.push_back(' ');
            break;
        }
        i += 2;
        continue;
      }
      i = read_name(s, i + 1, name);
      if (name == "begin" || name == "end") {
        std::string env;
        const std::size_t after = read_braced_name(s, i, env);
        if (after == std::string_view::npos) continue;
        i = after;
        if (name == "begin") {
          if (dropped_environments().contains(env)) {
            const std::string closing = "\\end{" + env + "}";
            const auto e = s.find(closing, i);
            i = e == std::string_view::npos ? s.size() : e + closing.size();
            out.push_back(' ');
            continue;
          }
          i = skip_optionals(s, i);
          if (auto it = env_arguments().find(env); it != env_arguments().end()) {
            for (int k = 0; k < it->second; ++k) i = skip_optionals(s, skip_mandatory(s, i));
          }
        }
        out.push_back(' ');
        continue;
      }
      if (auto it = dropped_arguments().find(name); it != dropped_arguments().end()) {
        i = skip_optionals(s, i);
        for (int k = 0; k < it->second; ++k) i = skip_optionals(s, skip_mandatory(s, i));
        out.push_back(' ');
        continue;
      }
      // Text-bearing or unknown command: drop the name and any [options].
      if (i < s.size() && s[i] == '[') i = skip_optionals(s, i);
      out.push_back(' ');
      continue;
    }
    switch (c) {
      case '{': case '}': case '$':
        break;
      case '~': case '&':
        out.push_back(' ');
        break;
      default:
        out.push_back(c);
    }
    ++i;
  }
  // A dropped \cite or \ref often leaves a gap before the punctuation that followed it.
  auto flat = collapse_whitespace(out);
  std::string tidy;
  tidy.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (flat[i] == ' ' && i + 1 < flat.size() && std::string_view(".,;:!?").find(flat[i + 1]) != std::string_view::npos)
      continue;
    tidy.push_back(flat[i]);
  }
  return tidy;
}

}  // namespace tae::latex
