#pragma once

#include <vector>

#include <Eigen/Core>

#include "fairprobe/dataset.hpp"
#include "fairprobe/types.hpp"

namespace fairprobe::objective {

struct ObjectiveConfig {
  double lambda = 1.0;  // sparsity weight
  int k = 5;            // attribute budget (per penalizable column for the penalty)
  double alpha = 0.45;  // group size lower bound, fraction of n
  double beta = 0.55;   // group size upper bound
  double mu = 0.0;      // size-constraint penalty weight (set by the solver)
  double eps_denom = 1e-12;
};

// Gap in favorable-outcome rate between the complement and the group:
//   P(fav | outside S) - P(fav | S), in [-1, 1].
// Both groups must be non-empty.
double dscore_hard(const BoolArray& fav, const BoolArray& members);

// Soft membership p_i = sigmoid(theta . x_i) for every encoded row.
Eigen::ArrayXd membership(const dataset::FeatureMatrix& fm,
                          const Eigen::VectorXd& theta);

// Expectation of the rate gap under independent Bernoulli(p_i) membership.
// Reduces to ratios of sums: with A = sum fav_i p_i, B = sum p_i, Y = sum
// fav_i, N = n, the value is (Y - A)/max(N - B, eps) - A/max(B, eps).
double expected_dscore(const BoolArray& fav, const Eigen::ArrayXd& p,
                       double eps_denom = 1e-12);

// Mean of the (m - k) smallest |w_j| over the penalizable columns (m of
// them). Zero when k == m; k > m is an error. Ties in |w| resolve by column
// index so the selected set is deterministic.
double penalty_topk(const Eigen::VectorXd& w, int k,
                    const std::vector<bool>& penalizable);

// Expected group fraction sum(p) / n.
double size_ratio(const Eigen::ArrayXd& p);

// Mask of columns subject to the sparsity penalty (everything except the
// intercept).
std::vector<bool> penalizable_mask(const dataset::FeatureMatrix& fm);

// expected_dscore - lambda * penalty - mu * (hinge(alpha - r)^2 +
// hinge(r - beta)^2) with r the expected group fraction.
double penalized_objective(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                           const Eigen::VectorXd& theta,
                           const ObjectiveConfig& cfg);

// Analytic gradient of penalized_objective (ascent direction). The penalty
// term uses the subgradient sign(w_j)/(m - k) on the selected smallest set,
// with sign(0) = 0.
Eigen::VectorXd gradient(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                         const Eigen::VectorXd& theta,
                         const ObjectiveConfig& cfg);

// Fused value + gradient sharing one membership evaluation; the solver's hot
// path. penalized_objective/gradient are thin wrappers over this, so all
// three agree bitwise.
struct Eval {
  double value = 0.0;
  Eigen::VectorXd grad;
};
Eval evaluate(const BoolArray& fav, const dataset::FeatureMatrix& fm,
              const Eigen::VectorXd& theta, const ObjectiveConfig& cfg);

}  // namespace fairprobe::objective
