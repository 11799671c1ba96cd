#include <cmath>
#include <set>

#include "doctest.h"

#include "fairprobe/dataset.hpp"
#include "fairprobe/distill.hpp"
#include "fairprobe/rng.hpp"
#include "test_util.hpp"

using namespace fairprobe;

namespace {

dataset::FeatureMatrix onehot_pair_matrix(const std::vector<int>& a,
                                          const std::vector<int>& b) {
  // Two binary attributes, one-hot encoded (value "0" then "1" per attribute).
  const Index n = static_cast<Index>(a.size());
  dataset::FeatureMatrix fm;
  fm.columns.resize(n, 4);
  for (Index i = 0; i < n; ++i) {
    fm.columns(i, 0) = a[i] == 0;
    fm.columns(i, 1) = a[i] == 1;
    fm.columns(i, 2) = b[i] == 0;
    fm.columns(i, 3) = b[i] == 1;
  }
  fm.colmap = {{0, 0, 0, 1}, {0, 1, 0, 1}, {1, 0, 0, 1}, {1, 1, 0, 1}};
  return fm;
}

std::vector<dataset::AttributeSpec> pair_schema() {
  std::vector<dataset::AttributeSpec> schema(2);
  schema[0].name = "a";
  schema[0].values = {"0", "1"};
  schema[1].name = "b";
  schema[1].values = {"0", "1"};
  return schema;
}

BoolArray from_bits(const std::vector<int>& bits) {
  BoolArray out(static_cast<Index>(bits.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = bits[i] != 0;
  return out;
}

}  // namespace

TEST_CASE("fit_tree resolves a single separating one-hot column") {
  std::vector<int> a, b;
  for (int i = 0; i < 12; ++i) {
    a.push_back(i % 2);
    b.push_back(i % 3 == 0);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray members(12), fav(12);
  for (Index i = 0; i < 12; ++i) {
    members[i] = a[i] == 1;
    fav[i] = i % 4 == 0;
  }
  const auto tree =
      distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 1);
  CHECK(distill::tree_depth(*tree) == 1);
  CHECK(distill::leaf_count(*tree) == 2);
  const auto pred = distill::classify(*tree, fm.columns);
  CHECK((pred == members).all());
  // One-hot splits always sit at 1/2.
  CHECK(tree->threshold == 0.5);
}

TEST_CASE("fit_tree captures an XOR interaction at depth 2") {
  // Unbalanced cell counts: a perfectly balanced XOR would leave the greedy
  // first split with zero gain.
  std::vector<int> a, b;
  const int counts[2][2] = {{14, 8}, {10, 8}};  // counts[a][b]
  for (int va = 0; va < 2; ++va)
    for (int vb = 0; vb < 2; ++vb)
      for (int c = 0; c < counts[va][vb]; ++c) {
        a.push_back(va);
        b.push_back(vb);
      }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray members(40), fav(40);
  for (Index i = 0; i < 40; ++i) {
    members[i] = (a[i] ^ b[i]) != 0;
    fav[i] = i % 5 == 0;
  }
  const auto tree =
      distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 1);
  CHECK(distill::tree_depth(*tree) == 2);
  const auto pred = distill::classify(*tree, fm.columns);
  CHECK((pred == members).all());
}

TEST_CASE("fit_tree collapses identical rows into a majority leaf") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(6, 2);
  BoolArray members(6), fav(6);
  members << true, true, true, false, false, false;  // 3 vs 3: tie
  fav.setConstant(false);
  const auto tree = distill::fit_tree(X, {0, 1}, members, fav, 1);
  CHECK(tree->is_leaf);
  CHECK_FALSE(tree->label_member);  // ties break to non-member
  CHECK(tree->count == 6);
  CHECK(tree->member_count == 3);
}

TEST_CASE("fit_tree respects min_leaf") {
  std::vector<int> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(i < 2);  // only two rows distinguish the classes
    b.push_back(0);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray members = from_bits({1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
  BoolArray fav = BoolArray::Constant(10, false);
  // A perfect split would leave a 2-row leaf; min_leaf 3 forbids it.
  const auto tree = distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 3);
  CHECK(tree->is_leaf);
  const auto loose = distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 2);
  CHECK_FALSE(loose->is_leaf);
}

TEST_CASE("fit_tree validates inputs") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
  BoolArray members = from_bits({1, 1, 0, 0});
  BoolArray fav = BoolArray::Constant(4, false);
  CHECK_THROWS_AS(distill::fit_tree(X, {}, members, fav, 1), std::invalid_argument);
  CHECK_THROWS_AS(distill::fit_tree(X, {2}, members, fav, 1), std::out_of_range);
  CHECK_THROWS_AS(distill::fit_tree(X, {0}, members, fav, 0), std::invalid_argument);
  CHECK_THROWS_AS(
      distill::fit_tree(X, {0}, BoolArray::Constant(4, true), fav, 1),
      std::invalid_argument);
}

TEST_CASE("ccp_sequence computes the textbook link strength") {
  // Root of 10 rows (3 members) split into a pure 6-row leaf and a 4-row leaf
  // with 1 error: g = (3/10 - 1/10) / (2 - 1) = 0.2.
  auto root = std::make_unique<distill::TreeNode>();
  root->is_leaf = false;
  root->column = 0;
  root->threshold = 0.5;
  root->count = 10;
  root->member_count = 3;
  root->fav_count = 4;
  root->label_member = false;
  root->left = std::make_unique<distill::TreeNode>();
  root->left->count = 6;
  root->left->member_count = 0;
  root->left->fav_count = 3;
  root->left->label_member = false;
  root->right = std::make_unique<distill::TreeNode>();
  root->right->count = 4;
  root->right->member_count = 3;
  root->right->fav_count = 1;
  root->right->label_member = true;

  const auto seq = distill::ccp_sequence(*root);
  REQUIRE(seq.size() == 2);
  CHECK(seq[0].alpha == 0.0);
  CHECK_FALSE(seq[0].root->is_leaf);
  CHECK(seq[1].alpha == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(seq[1].root->is_leaf);
  CHECK(seq[1].root->count == 10);
}

TEST_CASE("ccp_sequence of a lone leaf is just that leaf") {
  distill::TreeNode leaf;
  leaf.count = 5;
  leaf.member_count = 2;
  const auto seq = distill::ccp_sequence(leaf);
  REQUIRE(seq.size() == 1);
  CHECK(seq[0].alpha == 0.0);
  CHECK(seq[0].root->is_leaf);
}

TEST_CASE("ccp_sequence is nested with non-decreasing critical alphas") {
  Rng rng(19);
  const Index n = 300;
  Eigen::MatrixXd X(n, 3);
  BoolArray members(n), fav(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 3; ++j) X(i, j) = rng.uniform();
    // Noisy target so the tree grows several layers.
    members[i] = (X(i, 0) > 0.5) != (rng.uniform() < 0.15);
    fav[i] = rng.bernoulli(0.5);
  }
  const auto tree = distill::fit_tree(X, {0, 1, 2}, members, fav, 5);
  REQUIRE_FALSE(tree->is_leaf);
  const auto seq = distill::ccp_sequence(*tree);
  REQUIRE(seq.size() >= 2);
  CHECK(seq.front().alpha == 0.0);
  CHECK(seq.back().root->is_leaf);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    CHECK(seq[i].alpha >= seq[i - 1].alpha);
    // Strictly fewer leaves at every step: the sequence is nested.
    CHECK(distill::leaf_count(*seq[i].root) <
          distill::leaf_count(*seq[i - 1].root));
  }
  // The original tree is untouched and every tree keeps the full row count.
  CHECK(distill::leaf_count(*tree) ==
        distill::leaf_count(*seq.front().root));
  for (const auto& step : seq) CHECK(step.root->count == n);
}

TEST_CASE("extract_rules renders one-hot and continuous predicates") {
  // sex one-hot pair (male, female) and a standardized age column.
  dataset::FeatureMatrix fm;
  fm.colmap = {{0, 0, 0, 1}, {0, 1, 0, 1}, {1, -1, 35.0, 10.0}};
  std::vector<dataset::AttributeSpec> schema(2);
  schema[0].name = "sex";
  schema[0].values = {"male", "female"};
  schema[1].name = "age";
  schema[1].kind = dataset::AttrKind::continuous;

  auto root = std::make_unique<distill::TreeNode>();
  root->is_leaf = false;
  root->column = 0;  // sex = male?
  root->threshold = 0.5;
  root->count = 100;
  root->member_count = 40;
  auto not_male = std::make_unique<distill::TreeNode>();
  not_male->is_leaf = false;
  not_male->column = 2;  // age in standardized units
  not_male->threshold = 0.3;
  not_male->count = 50;
  not_male->member_count = 40;
  not_male->label_member = true;
  not_male->left = std::make_unique<distill::TreeNode>();
  not_male->left->count = 30;
  not_male->left->member_count = 30;
  not_male->left->fav_count = 3;
  not_male->left->label_member = true;
  not_male->right = std::make_unique<distill::TreeNode>();
  not_male->right->count = 20;
  not_male->right->member_count = 10;
  not_male->right->fav_count = 10;
  auto male = std::make_unique<distill::TreeNode>();
  male->count = 50;
  male->member_count = 0;
  male->fav_count = 25;
  root->left = std::move(not_male);
  root->right = std::move(male);

  const auto rules = distill::extract_rules(*root, fm.colmap, schema);
  REQUIRE(rules.size() == 3);

  CHECK(rules[0].member);
  REQUIRE(rules[0].predicates.size() == 2);
  CHECK(rules[0].predicates[0].attribute == "sex");
  CHECK(rules[0].predicates[0].op == distill::RelOp::neq);
  CHECK(rules[0].predicates[0].value == "male");
  CHECK(rules[0].predicates[1].attribute == "age");
  CHECK(rules[0].predicates[1].op == distill::RelOp::leq);
  // De-standardized: 0.3 * 10 + 35 = 38.
  CHECK(rules[0].predicates[1].threshold == doctest::Approx(38.0).epsilon(1e-12));
  CHECK(rules[0].support == 30);
  CHECK(rules[0].fav_rate == doctest::Approx(0.1).epsilon(1e-12));

  CHECK(rules[1].predicates[1].op == distill::RelOp::gt);
  CHECK_FALSE(rules[2].member);
  REQUIRE(rules[2].predicates.size() == 1);
  CHECK(rules[2].predicates[0].op == distill::RelOp::eq);
  CHECK(rules[2].predicates[0].value == "male");
}

TEST_CASE("extract_rules of a root-only tree is a single unconditional rule") {
  distill::TreeNode leaf;
  leaf.count = 8;
  leaf.member_count = 5;
  leaf.fav_count = 2;
  leaf.label_member = true;
  const auto rules = distill::extract_rules(leaf, {}, {});
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].predicates.empty());
  CHECK(rules[0].member);
  CHECK(rules[0].support == 8);
}

TEST_CASE("rules partition the rows: exactly one rule fires per row") {
  Rng rng(23);
  const Index n = 240;
  std::vector<int> a(n), b(n);
  for (Index i = 0; i < n; ++i) {
    a[i] = rng.bernoulli(0.5);
    b[i] = rng.bernoulli(0.3);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray members(n), fav(n);
  for (Index i = 0; i < n; ++i) {
    members[i] = (a[i] == 1 && b[i] == 0) != (rng.uniform() < 0.1);
    fav[i] = rng.bernoulli(0.4);
  }
  const auto tree = distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 5);
  const auto rules = distill::extract_rules(*tree, fm.colmap, pair_schema());

  const auto satisfied = [&](const distill::Rule& r, Index i) {
    for (const auto& p : r.predicates) {
      const int got = p.attribute == "a" ? a[i] : b[i];
      const int want = p.value == "1";
      if (p.op == distill::RelOp::eq && got != want) return false;
      if (p.op == distill::RelOp::neq && got == want) return false;
    }
    return true;
  };
  const auto pred = distill::classify(*tree, fm.columns);
  Index total_support = 0;
  for (const auto& r : rules) total_support += r.support;
  CHECK(total_support == n);
  for (Index i = 0; i < n; ++i) {
    int fired = 0;
    for (const auto& r : rules)
      if (satisfied(r, i)) {
        ++fired;
        CHECK(r.member == pred[i]);
      }
    CHECK(fired == 1);
  }
}

TEST_CASE("translate keeps a faithful tree and reports its gap") {
  // Members exactly = (a == 1): a depth-1 tree reproduces the group, and no
  // further pruning satisfies the size window.
  std::vector<int> a, b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(i % 2);
    b.push_back((i / 3) % 2);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray fav(60);
  for (Index i = 0; i < 60; ++i) fav[i] = (a[i] == 0) && (i % 3 == 0);

  solver::Evidence ev;
  ev.members = BoolArray(60);
  for (Index i = 0; i < 60; ++i) ev.members[i] = a[i] == 1;
  ev.key_attributes = {"a"};
  ev.theta_star = Eigen::VectorXd::Zero(4);
  ev.dscore = objective::dscore_hard(fav, ev.members);

  objective::ObjectiveConfig ocfg;
  ocfg.alpha = 0.4;
  ocfg.beta = 0.6;
  const auto pt = distill::translate(fav, fm, ev, ocfg, 5, pair_schema());
  CHECK(pt.constraint_ok);
  CHECK(pt.psi == 0.0);  // the unpruned two-leaf tree is already minimal
  CHECK(distill::tree_depth(*pt.root) == 1);
  REQUIRE(pt.dscore_prime.has_value());
  CHECK(*pt.dscore_prime == doctest::Approx(*ev.dscore).epsilon(1e-12));
  CHECK((pt.members_prime == ev.members).all());
  REQUIRE(pt.rules.size() == 2);
}

TEST_CASE("translate prunes as far as the size window allows") {
  // Evidence group: (a = 1) plus noise rows flipped by b; the full tree uses
  // both attributes but the window-satisfying pruned tree only needs a.
  Rng rng(29);
  const Index n = 400;
  std::vector<int> a(n), b(n);
  for (Index i = 0; i < n; ++i) {
    a[i] = rng.bernoulli(0.5);
    b[i] = rng.bernoulli(0.1);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray members(n), fav(n);
  for (Index i = 0; i < n; ++i) {
    members[i] = b[i] ? a[i] == 0 : a[i] == 1;
    fav[i] = rng.bernoulli(a[i] ? 0.2 : 0.7);
  }
  solver::Evidence ev;
  ev.members = members;
  ev.key_attributes = {"a", "b"};
  ev.theta_star = Eigen::VectorXd::Zero(4);

  objective::ObjectiveConfig ocfg;
  ocfg.alpha = 0.35;
  ocfg.beta = 0.65;
  const auto pt = distill::translate(fav, fm, ev, ocfg, 5, pair_schema());
  CHECK(pt.constraint_ok);
  const double ratio = static_cast<double>(pt.members_prime.count()) / n;
  CHECK(ratio >= 0.35);
  CHECK(ratio <= 0.65);
  // The pruned tree must be no larger than the unpruned fit.
  const auto full = distill::fit_tree(fm.columns, {0, 1, 2, 3}, members, fav, 5);
  CHECK(distill::leaf_count(*pt.root) <= distill::leaf_count(*full));
  REQUIRE(pt.dscore_prime.has_value());
  CHECK(*pt.dscore_prime > 0.3);
}

TEST_CASE("translate flags a tree that cannot satisfy the window") {
  std::vector<int> a, b;
  for (int i = 0; i < 20; ++i) {
    a.push_back(i < 6);
    b.push_back(0);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray fav(20);
  for (Index i = 0; i < 20; ++i) fav[i] = i % 2 == 0;
  solver::Evidence ev;
  ev.members = BoolArray(20);
  for (Index i = 0; i < 20; ++i) ev.members[i] = a[i] == 1;  // ratio 0.3
  ev.key_attributes = {"a"};
  ev.theta_star = Eigen::VectorXd::Zero(4);

  objective::ObjectiveConfig ocfg;
  ocfg.alpha = 0.49;
  ocfg.beta = 0.51;  // unreachable for any tree over this data
  const auto pt = distill::translate(fav, fm, ev, ocfg, 2, pair_schema());
  CHECK_FALSE(pt.constraint_ok);
  CHECK(pt.psi == 0.0);  // falls back to the unpruned tree
}

TEST_CASE("translate is deterministic and rejects empty evidence") {
  std::vector<int> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(i % 2);
    b.push_back(i % 5 == 0);
  }
  const auto fm = onehot_pair_matrix(a, b);
  BoolArray fav(30);
  for (Index i = 0; i < 30; ++i) fav[i] = i % 3 == 0;
  solver::Evidence ev;
  ev.members = BoolArray(30);
  for (Index i = 0; i < 30; ++i) ev.members[i] = a[i] == 1;
  ev.key_attributes = {"a"};
  ev.theta_star = Eigen::VectorXd::Zero(4);

  objective::ObjectiveConfig ocfg;
  ocfg.alpha = 0.3;
  ocfg.beta = 0.7;
  const auto p1 = distill::translate(fav, fm, ev, ocfg, 3, pair_schema());
  const auto p2 = distill::translate(fav, fm, ev, ocfg, 3, pair_schema());
  CHECK(p1.psi == p2.psi);
  CHECK((p1.members_prime == p2.members_prime).all());
  CHECK(p1.rules.size() == p2.rules.size());

  solver::Evidence empty = ev;
  empty.key_attributes.clear();
  CHECK_THROWS_AS(distill::translate(fav, fm, empty, ocfg, 3, pair_schema()),
                  std::invalid_argument);
}
