#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qds/cli/config.hpp"

namespace qds::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct RunResult {
  /// Contents of certificate.json.
  nlohmann::json certificate;
  /// Rows of trace.csv, header excluded.
  std::vector<std::string> csv_rows;
  std::vector<std::string> model_hashes;
};

inline constexpr const char* kCsvHeader = "N,k,q_k,weighted_partial_sum,t,leakage";

nlohmann::json to_json(const CriterionCertificate& cert);

/// Executes the configured pipeline; cells run on `jobs` worker threads and
/// are collected by index, so output does not depend on `jobs`.
RunResult run_pipeline(const ExperimentConfig& config, unsigned jobs);

/// Writes certificate.json, trace.csv and manifest.json into `dir`.
void write_artifacts(const std::string& dir, const ExperimentConfig& config, const RunResult& result, unsigned jobs,
                     double wall_seconds);

/// FNV-1a of the config text, 16 hex digits.
std::string config_hash(const std::string& text);

/// Prints the summary table for an artifact directory; returns the exit code.
int report_summary(const std::string& dir, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace qds::cli
