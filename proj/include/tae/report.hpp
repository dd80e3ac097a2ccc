#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tae/tae.hpp"

namespace tae {

inline constexpr const char* kToolVersion = "0.1.0";

struct ReportRow {
  std::string id;
  std::string metric;
  std::string variant;  // empty for plain scoring runs
  TaeScore score;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportMetadata {
  std::string tool_version = kToolVersion;
  std::string command;
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> extra;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct Report {
  ReportMetadata meta;
  std::vector<ReportRow> rows;
  /// One row per (variant, metric) group, id "aggregate": macro mean of the
  /// group's rows with summed panel counts.
  std::vector<ReportRow> aggregates;

  /// Recomputes `aggregates` from `rows`, groups in first-appearance order.
  void compute_aggregates();
  /// True when every aggregate matches the mean of its rows within `tol`
  /// and every group has an aggregate.
  bool aggregates_consistent(double tol = 1e-12) const;
};

enum class ReportFormat { Json, Csv };

std::string_view to_string(ReportFormat f) noexcept;
ReportFormat parse_report_format(std::string_view text);

std::string render_report(const Report& report, ReportFormat format);

/// Atomic write (temp file + rename).
void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);

/// Reads a JSON report and checks its aggregates; a mismatch is a
/// ValidationError.
Report parse_report(std::string_view json);
Report load_report(const std::filesystem::path& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace tae
