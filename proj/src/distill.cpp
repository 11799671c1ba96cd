#include "fairprobe/distill.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>

namespace fairprobe::distill {

namespace {

// Gains below this are treated as no improvement so numerically flat splits
// do not grow the tree.
constexpr double kMinGiniGain = 1e-12;

double gini(Index member, Index count) {
  if (count == 0) return 0.0;
  const double pm = static_cast<double>(member) / static_cast<double>(count);
  return 2.0 * pm * (1.0 - pm);
}

Index minority(const TreeNode& t) {
  return std::min(t.member_count, t.count - t.member_count);
}

std::unique_ptr<TreeNode> build(const Eigen::MatrixXd& X,
                                const std::vector<Index>& columns,
                                const BoolArray& members, const BoolArray& fav,
                                Index min_leaf, const std::vector<Index>& rows) {
  auto node = std::make_unique<TreeNode>();
  node->count = static_cast<Index>(rows.size());
  for (Index i : rows) {
    node->member_count += members[i] ? 1 : 0;
    node->fav_count += fav[i] ? 1 : 0;
  }
  node->label_member = 2 * node->member_count > node->count;

  if (node->member_count == 0 || node->member_count == node->count ||
      node->count < 2 * min_leaf)
    return node;

  // Exhaustive search: every column, every midpoint between adjacent distinct
  // values. First maximizer wins, so ties fall to the lowest column index and
  // then the lowest threshold.
  const double parent = gini(node->member_count, node->count);
  double best_gain = kMinGiniGain;
  Index best_col = -1;
  double best_thr = 0.0;

  std::vector<std::pair<double, bool>> vals;
  vals.reserve(rows.size());
  for (Index c : columns) {
    vals.clear();
    for (Index i : rows) vals.emplace_back(X(i, c), members[i]);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Index left_n = 0, left_m = 0;
    for (std::size_t pos = 1; pos < vals.size(); ++pos) {
      left_n += 1;
      left_m += vals[pos - 1].second ? 1 : 0;
      if (vals[pos].first == vals[pos - 1].first) continue;
      const Index right_n = node->count - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      const Index right_m = node->member_count - left_m;
      const double gain =
          parent -
          (static_cast<double>(left_n) / static_cast<double>(node->count)) *
              gini(left_m, left_n) -
          (static_cast<double>(right_n) / static_cast<double>(node->count)) *
              gini(right_m, right_n);
      if (gain > best_gain) {
        best_gain = gain;
        best_col = c;
        best_thr = (vals[pos - 1].first + vals[pos].first) / 2.0;
      }
    }
  }
  if (best_col < 0) return node;

  std::vector<Index> left_rows, right_rows;
  left_rows.reserve(rows.size());
  right_rows.reserve(rows.size());
  for (Index i : rows)
    (X(i, best_col) <= best_thr ? left_rows : right_rows).push_back(i);

  node->is_leaf = false;
  node->column = best_col;
  node->threshold = best_thr;
  node->left = build(X, columns, members, fav, min_leaf, left_rows);
  node->right = build(X, columns, members, fav, min_leaf, right_rows);
  return node;
}

}  // namespace

std::unique_ptr<TreeNode> clone(const TreeNode& node) {
  auto out = std::make_unique<TreeNode>();
  *out = TreeNode{node.is_leaf, node.column,       node.threshold,
                  nullptr,      nullptr,           node.count,
                  node.member_count, node.fav_count, node.label_member};
  if (!node.is_leaf) {
    out->left = clone(*node.left);
    out->right = clone(*node.right);
  }
  return out;
}

Index tree_depth(const TreeNode& node) {
  if (node.is_leaf) return 0;
  return 1 + std::max(tree_depth(*node.left), tree_depth(*node.right));
}

Index leaf_count(const TreeNode& node) {
  if (node.is_leaf) return 1;
  return leaf_count(*node.left) + leaf_count(*node.right);
}

std::unique_ptr<TreeNode> fit_tree(const Eigen::MatrixXd& X,
                                   const std::vector<Index>& columns,
                                   const BoolArray& members,
                                   const BoolArray& fav, Index min_leaf) {
  const Index n = X.rows();
  if (members.size() != n || fav.size() != n)
    throw std::invalid_argument("label lengths do not match the matrix");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be at least 1");
  if (columns.empty()) throw std::invalid_argument("no columns to split on");
  for (Index c : columns)
    if (c < 0 || c >= X.cols())
      throw std::out_of_range("split column " + std::to_string(c) +
                              " out of range");
  const Index m = members.count();
  if (m == 0 || m == n)
    throw std::invalid_argument("members must contain both classes");

  std::vector<Index> cols_sorted(columns);
  std::sort(cols_sorted.begin(), cols_sorted.end());
  std::vector<Index> rows(n);
  for (Index i = 0; i < n; ++i) rows[i] = i;
  return build(X, cols_sorted, members, fav, min_leaf, rows);
}

BoolArray classify(const TreeNode& root, const Eigen::MatrixXd& X) {
  BoolArray out(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    const TreeNode* t = &root;
    while (!t->is_leaf)
      t = X(i, t->column) <= t->threshold ? t->left.get() : t->right.get();
    out[i] = t->label_member;
  }
  return out;
}

std::vector<CcpStep> ccp_sequence(const TreeNode& root) {
  if (root.count <= 0) throw std::invalid_argument("tree carries no rows");
  const double n_total = static_cast<double>(root.count);

  std::vector<CcpStep> seq;
  auto work = clone(root);
  seq.push_back({0.0, clone(*work)});

  while (!work->is_leaf) {
    struct Link {
      TreeNode* node;
      double g;
      Index depth;
    };
    std::vector<Link> links;
    // Post-order pass: per internal node, leaves and misclassification of its
    // subtree give the link strength.
    std::function<std::pair<Index, Index>(TreeNode*, Index)> visit =
        [&](TreeNode* t, Index depth) -> std::pair<Index, Index> {
      if (t->is_leaf) return {Index{1}, minority(*t)};
      const auto l = visit(t->left.get(), depth + 1);
      const auto r = visit(t->right.get(), depth + 1);
      const Index leaves = l.first + r.first;
      const Index sub_mis = l.second + r.second;
      const double g = (static_cast<double>(minority(*t) - sub_mis) / n_total) /
                       static_cast<double>(leaves - 1);
      links.push_back({t, g, depth});
      return {leaves, sub_mis};
    };
    visit(work.get(), 0);

    double g_min = links.front().g;
    for (const auto& l : links) g_min = std::min(g_min, l.g);

    // Collapse every node tied at the minimum, deeper nodes first so a
    // descendant is already done before an ancestor's collapse frees it.
    std::vector<Link> tied;
    for (const auto& l : links)
      if (l.g == g_min) tied.push_back(l);
    std::stable_sort(tied.begin(), tied.end(),
                     [](const Link& a, const Link& b) { return a.depth > b.depth; });
    for (const auto& l : tied) {
      l.node->is_leaf = true;
      l.node->left.reset();
      l.node->right.reset();
    }
    seq.push_back({g_min, clone(*work)});
  }
  return seq;
}

std::vector<Rule> extract_rules(const TreeNode& root,
                                const std::vector<dataset::ColumnInfo>& colmap,
                                const std::vector<dataset::AttributeSpec>& schema) {
  std::vector<Rule> rules;
  std::vector<RulePredicate> path;
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& t) {
    if (t.is_leaf) {
      Rule r;
      r.predicates = path;
      r.member = t.label_member;
      r.support = t.count;
      r.fav_rate = t.count > 0
                       ? static_cast<double>(t.fav_count) / static_cast<double>(t.count)
                       : 0.0;
      rules.push_back(std::move(r));
      return;
    }
    const auto& info = colmap.at(t.column);
    if (info.attribute == dataset::kIntercept)
      throw std::invalid_argument("tree splits on the intercept column");
    const auto& spec = schema.at(info.attribute);

    RulePredicate left, right;
    left.attribute = right.attribute = spec.name;
    if (info.value >= 0) {
      left.categorical = right.categorical = true;
      left.op = RelOp::neq;
      right.op = RelOp::eq;
      left.value = right.value = spec.values.at(info.value);
    } else {
      left.categorical = right.categorical = false;
      left.op = RelOp::leq;
      right.op = RelOp::gt;
      left.threshold = right.threshold = t.threshold * info.stddev + info.mean;
    }
    path.push_back(left);
    walk(*t.left);
    path.back() = right;
    walk(*t.right);
    path.pop_back();
  };
  walk(root);
  return rules;
}

PrunedTree translate(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                     const solver::Evidence& evidence,
                     const objective::ObjectiveConfig& obj_cfg, Index min_leaf,
                     const std::vector<dataset::AttributeSpec>& schema) {
  if (evidence.key_attributes.empty())
    throw std::invalid_argument("evidence names no key attributes to distill");

  std::set<Index> q_attrs;
  for (const auto& name : evidence.key_attributes) {
    Index ai = -1;
    for (Index cand = 0; cand < static_cast<Index>(schema.size()); ++cand)
      if (schema[cand].name == name) ai = cand;
    if (ai < 0) throw std::invalid_argument("evidence attribute '" + name +
                                            "' missing from the schema");
    q_attrs.insert(ai);
  }
  std::vector<Index> cols;
  for (Index j = 0; j < static_cast<Index>(fm.colmap.size()); ++j)
    if (fm.colmap[j].attribute != dataset::kIntercept &&
        q_attrs.count(fm.colmap[j].attribute))
      cols.push_back(j);

  const Index n = fav.size();
  auto tree = fit_tree(fm.columns, cols, evidence.members, fav, min_leaf);
  auto seq = ccp_sequence(*tree);

  // Most pruned tree still inside the size window = last satisfying step.
  std::vector<BoolArray> predicted(seq.size());
  int chosen = -1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    predicted[i] = classify(*seq[i].root, fm.columns);
    const double ratio = static_cast<double>(predicted[i].count()) /
                         static_cast<double>(n);
    if (obj_cfg.alpha <= ratio && ratio <= obj_cfg.beta)
      chosen = static_cast<int>(i);
  }

  PrunedTree pt;
  const std::size_t pick = chosen >= 0 ? static_cast<std::size_t>(chosen) : 0;
  pt.constraint_ok = chosen >= 0;
  pt.psi = seq[pick].alpha;
  pt.root = std::move(seq[pick].root);
  pt.members_prime = std::move(predicted[pick]);
  const Index s = pt.members_prime.count();
  if (s > 0 && s < n) pt.dscore_prime = objective::dscore_hard(fav, pt.members_prime);
  pt.rules = extract_rules(*pt.root, fm.colmap, schema);
  return pt;
}

}  // namespace fairprobe::distill
