#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tae {

enum class Preferred { WithRep, SkipRep };

/// One annotator's judgment of one document pair.
struct PreferenceAnnotation {
  std::string doc_id;
  std::string annotator_id;
  Preferred preferred = Preferred::WithRep;
  int degree = 1;  // 1 slight, 2 moderate, 3 strong

  friend bool operator==(const PreferenceAnnotation&, const PreferenceAnnotation&) = default;
};

/// s = m(with rep) - m(skip rep) for one document and metric.
struct MetricDelta {
  std::string doc_id;
  std::string metric;
  double s = 0.0;

  friend bool operator==(const MetricDelta&, const MetricDelta&) = default;
};

/// +degree for WithRep, -degree for SkipRep.
int signed_preference(const PreferenceAnnotation& ann);

/// Product-moment correlation. Throws LengthMismatch, or DegenerateInput for
/// fewer than two points or a constant side.
double pearson(std::span<const double> x, std::span<const double> y);

struct Affinity {
  double r = 0.0;
  std::size_t n = 0;
  double t = 0.0;
  double p_value = 1.0;  // two-sided, t distribution with n - 2 degrees of freedom
  std::string p_note;
};

/// Pearson r between each annotation's signed preference and its document's
/// delta. Deltas must all belong to one metric. Throws MissingDelta.
Affinity affinity(std::span<const MetricDelta> deltas, std::span<const PreferenceAnnotation> prefs);

/// Nominal Krippendorff's alpha over the preferred label. Units with fewer
/// than two annotations are not pairable and are ignored. Throws
/// InsufficientData when no unit is pairable.
double krippendorff_alpha(std::span<const PreferenceAnnotation> prefs);

struct PreferenceRate {
  double majority_rate = 0.0;   // documents where WithRep has a strict majority
  double unanimous_rate = 0.0;  // documents where every annotator chose WithRep
  std::size_t documents = 0;
};

/// Throws InsufficientData when there are no annotations.
PreferenceRate preference_rate(std::span<const PreferenceAnnotation> prefs);

/// JSON lines {doc_id, annotator_id, preferred: "with"|"skip", degree: 1..3}.
/// Throws ParseError (with line), MissingField, or DuplicateId for a repeated
/// (doc_id, annotator_id).
std::vector<PreferenceAnnotation> parse_annotations(std::string_view contents,
                                                    const std::string& source_name = "<annotations>");
std::vector<PreferenceAnnotation> load_annotations(const std::filesystem::path& path);

/// CSV with header doc_id,metric,with_score,skip_score or JSON lines with
/// the same fields. The format is picked from the first non-blank character.
std::vector<MetricDelta> parse_deltas(std::string_view contents, const std::string& source_name = "<deltas>");
std::vector<MetricDelta> load_deltas(const std::filesystem::path& path);

}  // namespace tae
