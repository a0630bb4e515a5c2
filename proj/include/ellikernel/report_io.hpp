#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellikernel/pipeline.hpp"

namespace ellikernel {

inline constexpr const char* kReportSchema = "ellikernel/1";

struct Formats {
  bool json = true;
  bool csv = false;
  bool svg = false;
};

/// Parses a comma-separated subset of {json, csv, svg}.
Formats parse_formats(const std::string& list);

/// Full report document. Wall-clock data lives under the top-level "timing" key only.
nlohmann::json report_to_json(const Report& report);

/// The document without its "timing" member, for determinism comparisons.
nlohmann::json without_timing(nlohmann::json doc);

/// Writes the requested formats into out_dir (created if missing) and returns
/// the written paths. Throws std::runtime_error naming the path on I/O failure,
/// and when a profile point falls outside the fitted envelopes.
std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& out_dir,
                                               const Formats& formats);

/// Same, starting from a report document (as produced by report_to_json).
std::vector<std::filesystem::path> emit_document(const nlohmann::json& doc, const std::filesystem::path& out_dir,
                                                 const Formats& formats);

/// %.17g, the CSV number format.
std::string format_number(double v);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace ellikernel
