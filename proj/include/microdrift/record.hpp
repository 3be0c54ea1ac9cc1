#pragma once

#include "microdrift/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace microdrift {

inline constexpr const char* kArtifactName = "microdrift";
inline constexpr const char* kArtifactVersion = "1.0.0";

/// Everything one CLI invocation produced. Only the "timestamp" block of the
/// serialised record depends on the wall clock.
struct RunRecord {
  std::string command;
  Json config = Json::object();
  Json reports = Json::object();
  Json timings = Json::object();  // seconds per phase
  std::string created_utc;        // ISO 8601

  std::string run_id() const;
  Json to_json() const;
  static RunRecord from_json(const Json& doc);
};

/// FNV-1a over the compact JSON dump, 16 hex digits.
std::string config_hash(const Json& config);
std::string utc_now();

struct OutputFile {
  std::string name;
  std::string content;
};

/// Writes via a temporary file in the same directory and renames it into
/// place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Writes run.json and the extra files into `dir`. Every file is staged
/// first; if any write fails the staged files are removed and nothing is
/// renamed into place.
std::vector<std::filesystem::path> persist_run(const RunRecord& record, const std::filesystem::path& dir,
                                               const std::vector<OutputFile>& extra = {});

struct PlotOutcome {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

/// drift_vs_eps.svg (sweep), psi_staircase.svg (psi table) and
/// drift_decomposition.svg (drift series). Missing reports are skipped
/// with a notice.
PlotOutcome emit_plots(const Json& record, const std::filesystem::path& dir);

}  // namespace microdrift
