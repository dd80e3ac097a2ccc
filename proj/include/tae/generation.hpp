#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tae/completion.hpp"
#include "tae/retry.hpp"
#include "tae/text_model.hpp"

namespace tae {

struct IrSection {
  std::string heading;
  std::vector<std::string> sentences;

  friend bool operator==(const IrSection&, const IrSection&) = default;
};

/// Step-one output: {title, authors[], sections:[{heading, sentences[]}]}.
struct IntermediateRepresentation {
  std::string title;
  std::vector<std::string> authors;
  std::vector<IrSection> sections;

  friend bool operator==(const IntermediateRepresentation&, const IntermediateRepresentation&) = default;
};

/// Pretty-printed JSON with keys in schema order.
std::string serialize_ir(const IntermediateRepresentation& ir);

/// The JSON template placed in the step-one prompt.
const std::string& ir_schema();

/// Outermost structured block of a model answer: a fenced ``` block when one
/// holds an object, otherwise the first balanced {...}.
std::optional<std::string> find_structured_block(std::string_view output);

/// Reads a representation out of a model answer. When nothing parses, strict
/// mode throws IrParseError; otherwise the whole answer becomes one untitled
/// section with one sentence per non-empty line.
IntermediateRepresentation parse_ir(std::string_view model_output, bool strict = false);

/// Title, authors, then each heading and sentence on its own line.
std::string flatten_ir(const IntermediateRepresentation& ir);

enum class RepresentationMode { NoRep, OwnRep, TextRep, JsonRep };

std::string_view to_string(RepresentationMode m) noexcept;
/// Accepts none|own|text|json.
RepresentationMode parse_rep_mode(std::string_view text);

struct StyleParameter {
  TemplateKind template_kind = TemplateKind::slides();
  std::string description;

  /// The built-in description for slides, poster and blog. Throws
  /// ValidationError for a custom template.
  static StyleParameter defaults(const TemplateKind& t);
};

inline constexpr std::array<double, 5> kTemperatureSweep = {0.0, 0.25, 0.5, 0.75, 1.0};

struct GenerationConfig {
  std::string model = "default";
  double temperature = 0.0;
  std::size_t max_input_tokens = 12000;
  std::size_t chars_per_token = 4;
  int max_output_tokens = 2048;
  RepresentationMode mode = RepresentationMode::JsonRep;
  bool style = true;
  std::string style_description;  // empty: built-in text for the template
  TemplateKind template_kind = TemplateKind::slides();
  bool strict_ir = false;         // JsonRep only: unparseable step one is an error
  RetryPolicy retry;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  std::optional<StyleParameter> style_parameter() const;
};

/// Each whitespace-separated word costs max(1, ceil(bytes / chars_per_token)).
std::size_t count_tokens(std::string_view text, std::size_t chars_per_token = 4);

/// Longest prefix of whole words that fits the budget; text that already
/// fits is returned unchanged.
std::string truncate_to_window(std::string_view text, std::size_t token_budget,
                               std::size_t chars_per_token = 4);

std::string build_ir_prompt(std::string_view document, bool include_schema,
                            std::size_t token_budget = SIZE_MAX, std::size_t chars_per_token = 4);

/// "slide deck", "poster", "blog post", or the custom template's name.
std::string template_type_word(const TemplateKind& t);

std::string build_view_prompt(std::string_view input, const TemplateKind& t,
                              const std::optional<StyleParameter>& style);

/// Wraps text in a document environment unless it already has one.
std::string ensure_latex_document(std::string_view text);

struct StepRecord {
  std::string step;  // "representation" or "view"
  std::string prompt;
  std::string output;
  double duration_ms = 0.0;
  std::size_t prompt_tokens = 0;
  std::size_t output_tokens = 0;
  int attempts = 0;
};

struct GenerationResult {
  std::string latex;
  std::optional<IntermediateRepresentation> ir;
  std::vector<StepRecord> trace;
};

/// NoRep: one call on the (truncated) document. Other modes: a step-one call
/// for the representation, then the view call on the extracted block
/// (JsonRep, OwnRep) or the flattened text (TextRep). Provider failures are
/// retried per config.retry and rethrown as ProviderError naming the step.
GenerationResult generate_view(std::string_view document, const GenerationConfig& config,
                               CompletionClient& client);

/// Runs generate_view over many documents with at most `jobs` in flight.
/// Results keep input order; the first failure (in input order) is rethrown.
std::vector<GenerationResult> generate_batch(std::span<const std::string> documents,
                                             const GenerationConfig& config,
                                             CompletionClient& client, std::size_t jobs = 1);

}  // namespace tae
