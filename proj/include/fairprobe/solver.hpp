#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairprobe/dataset.hpp"
#include "fairprobe/objective.hpp"
#include "fairprobe/types.hpp"

namespace fairprobe::solver {

struct SolverConfig {
  double learning_rate = 0.1;
  int iterations = 2500;  // total, split evenly across penalty rounds
  double clip_norm = 5.0;
  int penalty_rounds = 5;
  double mu_init = 1.0;
  double mu_growth = 10.0;
  std::uint64_t seed = 1;
  double init_scale = 0.01;  // stddev of the Gaussian init
};

// Raised when the objective goes non-finite mid-ascent; carries the state at
// the failing iteration for post-mortems.
struct SolverError : std::runtime_error {
  SolverError(int iteration_, Eigen::VectorXd theta_)
      : std::runtime_error("non-finite objective at iteration " +
                           std::to_string(iteration_)),
        iteration(iteration_),
        theta(std::move(theta_)) {}
  int iteration;
  Eigen::VectorXd theta;
};

struct OptimizeResult {
  Eigen::VectorXd theta;
  std::vector<double> trace;  // objective value at every iteration
};

// Scales g down to max_norm when its 2-norm exceeds it; otherwise untouched.
Eigen::VectorXd clip_to_norm(Eigen::VectorXd g, double max_norm);

// Full-batch clipped gradient ascent on the penalized objective under an
// escalating size-constraint weight: penalty_rounds rounds of
// iterations/penalty_rounds steps each, mu multiplied by mu_growth between
// rounds. Weights start at init_scale * N(0, 1) draws from the seed.
OptimizeResult optimize(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                        const objective::ObjectiveConfig& obj_cfg,
                        const SolverConfig& cfg);

// How the weight budget k is counted when truncating.
enum class KGrouping {
  attribute,  // k distinct source attributes; kept attributes keep all columns
  column      // k encoded columns
};

// Zeroes every penalizable column outside the top-k by |w|, ranking ties by
// column index. Attribute grouping walks the ranking collecting distinct
// source attributes until k are found and keeps all their columns. The
// intercept is never ranked or zeroed.
Eigen::VectorXd truncate_topk(const Eigen::VectorXd& theta, int k,
                              const std::vector<dataset::ColumnInfo>& colmap,
                              KGrouping grouping = KGrouping::attribute);

struct Evidence {
  BoolArray members;                        // hard group: p_i >= 0.5
  std::vector<std::string> key_attributes;  // by max |w| over the attribute's columns, descending
  Eigen::VectorXd theta_star;
  std::optional<double> dscore;  // unset when the group or complement is empty
  double size_ratio = 0.0;       // realized |S| / n
  bool constraint_ok = false;    // non-degenerate and alpha <= size_ratio <= beta
  std::vector<double> trace;
};

// Hardens a (truncated) weight vector into auditable evidence.
Evidence derive_evidence(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                         const Eigen::VectorXd& theta,
                         const objective::ObjectiveConfig& obj_cfg,
                         const std::vector<dataset::AttributeSpec>& schema);

}  // namespace fairprobe::solver
