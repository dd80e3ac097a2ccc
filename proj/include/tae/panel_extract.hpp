#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tae/text_model.hpp"

namespace tae {

enum class SourceFormat { LatexBeamer, LatexGeneric, PlainText, MarkdownLike };

std::string_view to_string(SourceFormat f) noexcept;
/// Accepts latex-beamer|latex|plain|markdown.
SourceFormat parse_source_format(std::string_view text);

/// Format assumed for generated output of a template when none is given.
SourceFormat default_format(const TemplateKind& t) noexcept;

struct Extraction {
  PanelSequence sequence;
  /// Set when the markup could not be split by its own rule and plain-text
  /// splitting was used instead.
  bool degraded = false;
  std::vector<std::string> warnings;
};

/// Cuts a document into panels following the template's panel rule:
///  - frame rule: one panel per frame environment, title then body;
///  - section rule: one panel per top-level sectioning command or block
///    environment, heading then body (nested blocks stay in their parent);
///  - whole rule: a single panel holding the entire stripped text;
///  - paragraph rule: blank-line separated paragraphs.
/// Malformed LaTeX never throws; it falls back to paragraph splitting and
/// records a warning.
Extraction extract_panels(std::string_view document, const TemplateKind& template_kind,
                          SourceFormat format, const TokenizerConfig& cfg = {},
                          Role role = Role::Generated);

/// Panel text for plain text: `===` delimiter lines when present, otherwise
/// blank-line separated paragraphs. Whitespace is collapsed.
std::vector<std::string> split_plain(std::string_view text);

/// Removes Markdown markers (headings, emphasis, list bullets, links).
std::string strip_markdown(std::string_view text);

std::string strip_latex(std::string_view text);

// ---------------------------------------------------------------------------
// Files

/// One line of a reference corpus (JSON lines).
struct CorpusRecord {
  std::string id;
  TemplateKind template_kind = TemplateKind::slides();
  std::optional<std::string> input_text;
  std::vector<std::string> reference_panels;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

/// Reads a JSON-lines corpus: {id, template, input_text?, reference_panels[]}.
/// Blank lines are skipped. Throws ParseError, DuplicateId or MissingField
/// carrying the 1-based line number.
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);
std::vector<CorpusRecord> parse_corpus(std::string_view contents, const std::string& source_name = "<corpus>");
void save_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path);

/// One line of a generated corpus: a produced view and, once extracted, its panels.
struct GeneratedRecord {
  std::string id;
  TemplateKind template_kind = TemplateKind::slides();
  SourceFormat format = SourceFormat::LatexBeamer;
  std::string text;
  std::optional<std::vector<std::string>> panels;
  std::string variant;  // free-form label, e.g. "json_rep+style"

  friend bool operator==(const GeneratedRecord&, const GeneratedRecord&) = default;
};

std::vector<GeneratedRecord> load_generated(const std::filesystem::path& path);
std::vector<GeneratedRecord> parse_generated(std::string_view contents,
                                             const std::string& source_name = "<generated>");
void save_generated(const std::vector<GeneratedRecord>& records, const std::filesystem::path& path);
std::string serialize_generated(const std::vector<GeneratedRecord>& records);

/// Panels of a generated record: the stored list when present, otherwise
/// extracted from its text.
Extraction generated_panels(const GeneratedRecord& rec, const TokenizerConfig& cfg = {});

/// A PanelSequence as JSON {role, template, panels:[...]}.
void save_panels(const PanelSequence& sequence, const std::filesystem::path& path);
PanelSequence load_panels(const std::filesystem::path& path, const TokenizerConfig& cfg = {});

/// Human-readable dump: panel texts separated by "\n===\n".
std::string panel_dump(const PanelSequence& sequence);
std::vector<std::string> parse_panel_dump(std::string_view dump);

}  // namespace tae
