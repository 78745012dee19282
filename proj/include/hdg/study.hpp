#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hdg/scheme.hpp"
#include "hdg/verify.hpp"

namespace hdg {

enum class OutputFormat { csv, markdown };

struct StudyConfig {
  MethodConfig method;
  std::string mesh = "right-split";  ///< right-split, criss-cross or file:PATH (PATH.node + PATH.ele)
  std::vector<int> refinements{4, 8, 16, 32};
  std::string solution = "sine";
  OutputFormat format = OutputFormat::csv;
  std::string out_path;   ///< empty: standard output
  std::string json_path;  ///< empty: no sidecar
  bool checks = true;

  /// Throws hdg::Error(config).
  void validate() const;
};

/// Applies one `key = value` setting; keys are the long CLI option names
/// (method, k, w-degree, stab, tau, tau-rule, mesh, refine, solution,
/// labeling, format, out, json, checks, jobs). Underscores are accepted in
/// place of dashes. Throws hdg::Error(config).
void apply_setting(StudyConfig& config, const std::string& key, const std::string& value);

/// Parses a key=value file ('#' starts a comment, values may be quoted).
void apply_config_text(StudyConfig& config, const std::string& text);

std::vector<int> parse_refinements(const std::string& text);

struct StudyRow {
  int n = 0;         ///< refinement parameter (0 for imported meshes)
  double inv_h = 0.0;
  double h = 0.0;    ///< max element diameter
  ErrorReport errors;
  std::optional<double> ord_q, ord_u, ord_piwu;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<StudyRow> rows;
  std::vector<std::string> failed_checks;

  bool ok() const { return failed_checks.empty(); }
};

/// Runs the refinement sweep. Throws hdg::Error on configuration or solver
/// failures; enabled checks (identity residuals, projection corollary) that
/// fail are collected in `failed_checks`.
ConvergenceReport run_study(const StudyConfig& config);

inline constexpr double identity_tolerance = 1e-10;

std::string emit(const ConvergenceReport& report, OutputFormat format);
/// Full-precision JSON.
std::string emit_json(const ConvergenceReport& report);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationSummary {
  std::vector<CheckResult> checks;

  bool ok() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Oracle equivalence, energy identity, flux residual, transmission, zero
/// data, M-index, inf-sup and projection-corollary checks on meshes with
/// n <= 4 for the configured method. Solver failures are recorded as failed
/// checks.
VerificationSummary run_verification_suite(const StudyConfig& config);

}  // namespace hdg
