#pragma once
// Scenario runner: JSON config in, CSV + JSON summary + plot-data files out.
// One scenario per invocation. Exit code 0 when every threshold passes,
// 2 on a threshold failure, 1 on any error (validation errors are listed
// exhaustively before compute starts, and nothing is written).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dbar/complexn.hpp"

namespace dbar {

struct NormRequest {
  int k = 0;
  double p = 2.0;
  double mu = 0.5;
};

struct LemmaRequest {
  std::string which = "intestl-i";  // intestl-i | intestl-ii | h0ele-i | h0ele-ii | h0ele-iii
  std::vector<double> alphas;       // empty: case defaults
  double delta_lo = 0.0, delta_hi = 0.0;  // 0: case default window
  int per_decade = 7;
  int cells_per_level = 8;
};

struct ScenarioConfig {
  std::string scenario;
  std::string domain = "ball";  // "ball" | "ellipsoid"
  std::vector<double> ellipsoid_coeffs;
  int n = 2;
  int q = 1;
  int level = 1;
  int threads = 1;
  double shell_width = 0.25;
  std::uint64_t seed = 2026;
  std::string family = "exact_polynomial";
  std::string out_dir = ".";
  int pairs = 100;      // kernel-identity sample count
  double fd_h = 1e-4;   // kernel-identity base step
  std::vector<NormRequest> norms;
  std::vector<CVec> points;  // empty: scenario defaults
  LemmaRequest lemma;
  std::map<std::string, double> thresholds;  // overrides of built-in limits
};

// load + dotted-path overrides ("lemma.per_decade=5", "thresholds.max_error=1e-2")
ScenarioConfig parse_config(const std::string& path,
                            const std::vector<std::string>& overrides = {});

struct ThresholdCheck {
  std::string name;
  double measured = 0.0;
  double limit = 0.0;
  std::string op = "<=";
  bool pass = false;
};

struct ScenarioResult {
  bool pass = false;
  int exit_code = 0;
  std::vector<ThresholdCheck> checks;
  std::string csv_path, json_path, plot_path;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct RecordTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// CSV with RFC-4180 quoting and a header row, the JSON summary text, and the
// plot-data text (two-column numeric series under '#' axis-naming headers).
// Empty tables are rejected; unwritable paths raise with the path named.
void emit_report(const RecordTable& records, const std::string& json_summary,
                 const std::string& plot_data, const std::string& csv_path,
                 const std::string& json_path, const std::string& plot_path);

std::string csv_escape(const std::string& field);

}  // namespace dbar
