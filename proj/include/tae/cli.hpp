#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tae/analysis.hpp"
#include "tae/generation.hpp"
#include "tae/panel_extract.hpp"
#include "tae/report.hpp"
#include "tae/similarity.hpp"

namespace tae::cli {

/// Settings of one CLI invocation after merging the config file and flags.
struct RunConfig {
  std::string command;

  std::string corpus;       // reference corpus (JSON lines)
  std::string generated;    // generated corpus (JSON lines)
  std::string input;        // extract: single document
  std::string with_path;    // correlate: generated corpus with representation
  std::string skip_path;    // correlate: generated corpus without representation
  std::string annotations;
  std::string deltas;
  std::string dump_dir;
  std::string trace;

  std::vector<MetricId> metrics{MetricId::RougeL};
  std::optional<TemplateKind> template_kind;
  std::optional<SourceFormat> source_format;
  std::vector<RepresentationMode> rep_modes{RepresentationMode::JsonRep};
  std::vector<bool> styles{true};
  std::vector<double> temperatures{0.0};
  std::string style_description;
  std::string endpoint;
  std::string model = "default";
  std::size_t max_input_tokens = 12000;
  std::string embedding_endpoint = "hashing";
  std::string embedding_cache;

  std::string out;
  ReportFormat format = ReportFormat::Json;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  std::size_t docs = 10;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// Canonical form (sorted keys, output path left out).
  nlohmann::json canonical() const;
  std::string hash() const;
  GenerationConfig generation(RepresentationMode mode, bool style, double temperature,
                              const TemplateKind& t) const;
};

/// Applies a JSON config object; unknown keys and bad values are
/// ValidationErrors naming the key and the source.
void apply_config(RunConfig& cfg, const nlohmann::json& j, const std::string& source);

struct ExtractOutcome {
  std::vector<GeneratedRecord> records;
  std::vector<std::string> warnings;
};

struct GenerateOutcome {
  std::vector<GeneratedRecord> records;
  std::vector<std::vector<StepRecord>> traces;  // per record
};

struct CorrelationRow {
  std::string metric;
  std::string scoring;  // "plain", "tae" or "given"
  Affinity affinity;
};

struct AgreementSummary {
  double alpha = 0.0;
  PreferenceRate rates;
  std::size_t annotations = 0;
};

struct SyntheticCorpus {
  std::vector<CorpusRecord> reference;
  std::vector<GeneratedRecord> generated;
};

/// Seeded synthetic reference corpus (slides) with beamer outputs derived
/// from it by dropping, editing and reordering panels.
SyntheticCorpus make_synthetic_corpus(std::uint64_t seed, std::size_t docs);

ExtractOutcome cmd_extract(const RunConfig& cfg);
Report cmd_score(const RunConfig& cfg);
GenerateOutcome cmd_generate(const RunConfig& cfg);
Report cmd_bench(const RunConfig& cfg);
std::vector<CorrelationRow> cmd_correlate(const RunConfig& cfg);
AgreementSummary cmd_agreement(const RunConfig& cfg);
SyntheticCorpus cmd_synth(const RunConfig& cfg);

/// Full command line including argv[0]. Returns 0 on success, 1 on
/// validation errors, 2 on runtime errors. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tae::cli
