#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tae::latex {

/// Plain text of a LaTeX fragment: comments, environment delimiters and
/// command names go; arguments of text-bearing commands stay; arguments of
/// layout/reference commands (\label, \includegraphics, \usepackage, ...)
/// are dropped; whitespace is collapsed. Best effort and total.
std::string strip_latex(std::string_view text);

/// Removes %-comments (an escaped \% is kept).
std::string remove_comments(std::string_view text);

struct EnvToken {
  std::size_t begin = 0;  // offset of the backslash
  std::size_t end = 0;    // one past the closing brace of the name
  bool opening = true;
  std::string name;
};

/// \begin{..} / \end{..} tokens in order. Expects comment-free text.
std::vector<EnvToken> scan_environments(std::string_view text);

/// Description of the first structural problem (unbalanced braces,
/// mismatched \begin/\end), or nullopt when the markup is well formed.
std::optional<std::string> structure_problem(std::string_view text);

/// Text between \begin{document} and \end{document}, or all of it.
std::string_view document_body(std::string_view text);

/// Contents of the first mandatory argument of \name (optional [..] skipped).
std::optional<std::string> command_argument(std::string_view text, std::string_view name);

/// Offset one past the group opening at text[pos] ('{' or '['), balancing
/// nested braces and honouring backslash escapes. Returns text.size() when
/// the group never closes.
std::size_t skip_group(std::string_view text, std::size_t pos);

}  // namespace tae::latex
