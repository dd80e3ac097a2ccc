#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tae {

using Tokens = std::vector<std::string>;

struct TokenizerConfig {
  bool lowercase = true;
  // Punctuation acts as a separator and is discarded.
  bool strip_punctuation = true;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// How a document of a given template is cut into panels.
enum class PanelRule {
  PerFrame,       // one panel per slide/frame
  PerSection,     // one panel per section or block
  WholeDocument,  // the entire document is a single panel
  PerParagraph,   // blank-line separated paragraphs
};

/// Document template. Slides, Poster and Blog carry a fixed panel rule;
/// Custom templates name their own.
class TemplateKind {
 public:
  enum class Kind { Slides, Poster, Blog, Custom };

  static TemplateKind slides() { return TemplateKind(Kind::Slides, "slides", PanelRule::PerFrame); }
  static TemplateKind poster() { return TemplateKind(Kind::Poster, "poster", PanelRule::PerSection); }
  static TemplateKind blog() { return TemplateKind(Kind::Blog, "blog", PanelRule::WholeDocument); }
  static TemplateKind custom(std::string name, PanelRule rule) {
    return TemplateKind(Kind::Custom, std::move(name), rule);
  }

  /// Accepts "slides", "poster", "blog" and "custom:<name>:<rule>" where
  /// rule is one of frame|section|whole|paragraph. Throws ValidationError.
  static TemplateKind parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  PanelRule rule() const noexcept { return rule_; }

  /// Inverse of parse().
  std::string to_string() const;

  friend bool operator==(const TemplateKind&, const TemplateKind&) = default;

 private:
  TemplateKind(Kind k, std::string name, PanelRule rule)
      : kind_(k), name_(std::move(name)), rule_(rule) {}

  Kind kind_;
  std::string name_;
  PanelRule rule_;
};

std::string_view to_string(PanelRule rule) noexcept;
PanelRule parse_panel_rule(std::string_view text);

enum class Role { Reference, Generated };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view text);

struct Panel {
  std::size_t index = 0;
  std::string text;
  Tokens tokens;

  friend bool operator==(const Panel&, const Panel&) = default;
};

/// An ordered run of panels from one document view.
struct PanelSequence {
  std::vector<Panel> panels;
  Role role = Role::Generated;
  TemplateKind template_kind = TemplateKind::slides();

  std::size_t size() const noexcept { return panels.size(); }
  bool empty() const noexcept { return panels.empty(); }
  const Panel& operator[](std::size_t i) const { return panels[i]; }

  friend bool operator==(const PanelSequence&, const PanelSequence&) = default;
};

/// Splits on Unicode whitespace; optionally lowercases (ASCII) and splits off
/// punctuation, dropping it. Total and deterministic.
Tokens tokenize(std::string_view text, const TokenizerConfig& cfg = {});

PanelSequence make_sequence(const std::vector<std::string>& texts, Role role,
                            TemplateKind template_kind,
                            const TokenizerConfig& cfg = {});

/// Number of Unicode code points in a UTF-8 string (invalid bytes count as one).
std::size_t utf8_length(std::string_view text) noexcept;

}  // namespace tae
