#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairprobe/dataset.hpp"
#include "fairprobe/objective.hpp"
#include "fairprobe/solver.hpp"
#include "fairprobe/types.hpp"

namespace fairprobe::distill {

struct TreeNode {
  bool is_leaf = true;
  // Split: rows with columns(row, column) <= threshold go left.
  Index column = -1;
  double threshold = 0.0;  // encoded units
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  // Training population of the node.
  Index count = 0;
  Index member_count = 0;
  Index fav_count = 0;
  bool label_member = false;  // majority label, ties break to non-member
};

std::unique_ptr<TreeNode> clone(const TreeNode& node);
Index tree_depth(const TreeNode& node);  // root-only tree has depth 0
Index leaf_count(const TreeNode& node);

// Binary CART with Gini impurity over the listed encoded columns, exhaustive
// split search (thresholds at midpoints of adjacent distinct observed values,
// so one-hot columns split at 0.5). Both children of any split hold at least
// min_leaf rows; split ties resolve to the lowest column index, then the
// lowest threshold.
std::unique_ptr<TreeNode> fit_tree(const Eigen::MatrixXd& X,
                                   const std::vector<Index>& columns,
                                   const BoolArray& members,
                                   const BoolArray& fav, Index min_leaf);

// Predicted labels for every row of X.
BoolArray classify(const TreeNode& root, const Eigen::MatrixXd& X);

// One element of the cost-complexity pruning path.
struct CcpStep {
  double alpha = 0.0;  // critical complexity at which this tree becomes optimal
  std::unique_ptr<TreeNode> root;
};

// Weakest-link pruning path from the full tree (alpha 0) down to the root-only
// tree. Each step collapses every internal node tied at the minimal link
// strength g(t) = (R(t) - R(T_t)) / (leaves(T_t) - 1), deeper nodes first,
// where R is the misclassification count over the full training size.
// Critical alphas are non-decreasing along the path.
std::vector<CcpStep> ccp_sequence(const TreeNode& root);

enum class RelOp { eq, neq, leq, gt };

struct RulePredicate {
  std::string attribute;
  RelOp op;
  std::string value;       // categorical comparisons
  double threshold = 0.0;  // continuous comparisons, original units
  bool categorical = true;
};

struct Rule {
  std::vector<RulePredicate> predicates;  // root-to-leaf order; empty = always
  bool member = false;
  Index support = 0;
  double fav_rate = 0.0;
};

// One rule per leaf, left-to-right. One-hot splits read as (attr = value) on
// the right branch and (attr != value) on the left; continuous thresholds are
// mapped back to original units.
std::vector<Rule> extract_rules(const TreeNode& root,
                                const std::vector<dataset::ColumnInfo>& colmap,
                                const std::vector<dataset::AttributeSpec>& schema);

struct PrunedTree {
  std::unique_ptr<TreeNode> root;
  double psi = 0.0;  // critical alpha of the chosen tree
  BoolArray members_prime;
  std::optional<double> dscore_prime;
  std::vector<Rule> rules;
  bool constraint_ok = true;  // false when even the unpruned tree violates the size bounds
};

// Distills evidence into rules: fits a tree on the key attributes' encoded
// columns to mimic the evidence group, walks the pruning path, and keeps the
// most pruned tree whose predicted group still satisfies
// alpha <= |S'|/n <= beta. When no tree on the path satisfies the bounds the
// unpruned tree is returned flagged.
PrunedTree translate(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                     const solver::Evidence& evidence,
                     const objective::ObjectiveConfig& obj_cfg, Index min_leaf,
                     const std::vector<dataset::AttributeSpec>& schema);

}  // namespace fairprobe::distill
