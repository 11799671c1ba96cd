#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprobe/dataset.hpp"
#include "fairprobe/distill.hpp"
#include "fairprobe/solver.hpp"

namespace fairprobe::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { ie, ie_dt, enumerate };

struct RunConfig {
  std::string input;
  std::string fav_column;
  std::string fav_value;
  std::vector<std::string> sensitive;  // empty = every attribute
  std::map<std::string, dataset::AttrKind> schema_hints;

  // Defaults mirror the published case studies.
  int k = 5;
  double alpha = 0.45;
  double beta = 0.55;
  double lambda = 1.0;
  double eps_denom = 1e-12;

  solver::SolverConfig solver;
  int seeds = 1;  // consecutive seeds starting at solver.seed; best evidence wins
  solver::KGrouping k_grouping = solver::KGrouping::attribute;

  Index min_leaf = 0;  // 0 = auto: max(5, n/200)
  Mode mode = Mode::ie_dt;
  double time_budget_secs = 5000.0;  // enum mode only

  std::string out_dir = ".";
  bool format_text = false;  // rules.txt
  bool format_dot = false;   // tree.dot
};

// Exit codes: 0 success, 2 only constraint-violating evidence, 1 is reserved
// for errors (thrown out of execute/run).
struct RunArtifacts {
  int exit_code = 0;
  nlohmann::json report;
  std::optional<std::string> rules_text;
  std::optional<std::string> dot_text;
};

// Runs the configured audit in-process and renders every artifact without
// touching the filesystem (other than reading the input).
RunArtifacts execute(const RunConfig& cfg);

// execute() plus artifact files under cfg.out_dir: report.json always,
// rules.txt / tree.dot when requested and applicable. Returns the exit code.
int run(const RunConfig& cfg);

// FNV-1a 64 over the line-ending-normalized file bytes, "fnv1a64:<16 hex>".
std::string fingerprint_file(const std::string& path);

// GraphViz rendering of a distilled tree: split nodes state the right-branch
// predicate, leaves carry label, support, member fraction and favorable rate.
std::string emit_dot(const distill::TreeNode& root,
                     const std::vector<dataset::ColumnInfo>& colmap,
                     const std::vector<dataset::AttributeSpec>& schema);

}  // namespace fairprobe::cli
