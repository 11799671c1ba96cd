#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/types.hpp"

namespace fairprobe::oracle {

// One atomic condition on a sensitive attribute. Categorical attributes
// compare by equality against a declared value; continuous attributes
// threshold in either direction.
struct Predicate {
  enum class Form { cat_eq, cont_gt, cont_leq };
  Index attribute = 0;
  Form form = Form::cat_eq;
  std::int32_t value = -1;   // cat_eq
  double threshold = 0.0;    // cont_gt / cont_leq
};

bool eval_predicate(const dataset::Dataset& data, const Predicate& pred, Index row);

struct EnumResult {
  std::vector<Predicate> predicates;  // empty when nothing satisfied the bounds
  BoolArray members;
  std::optional<double> dscore;
  std::uint64_t explored = 0;  // conjunctions materialized, including ones failing the bounds
  bool exhausted_budget = false;
};

// Exhaustive baseline: scores every conjunction of 1..k predicates over
// distinct sensitive attributes (categorical: one equality per declared
// value; continuous: both directions at every unique observed value) and
// returns the best group satisfying alpha <= |S|/n <= beta. Enumeration is
// lexicographic over (attribute subset, per-attribute predicate index), and
// ties keep the first maximizer, i.e. the lexicographically smallest
// conjunction. The time budget is checked between candidates; on expiry the
// best so far is returned with exhausted_budget set.
EnumResult enum_search(const dataset::Dataset& data, int k, double alpha,
                       double beta, double time_budget_secs);

struct PlantedDataset {
  dataset::Dataset data;
  BoolArray planted;  // ground-truth group mask
};

// Synthetic benchmark generator: n_binary fair-coin attributes "b0".. with
// values {"0","1"}, n_continuous uniform [0,1) attributes "c0"..; favorable
// flags drawn Bernoulli(rate_in) inside the planted conjunction and
// Bernoulli(rate_out) outside. Requires 0 <= rate_in < rate_out <= 1. When a
// draw leaves the planted group empty the dataset is regenerated from the
// next seed; 100 failures is an error.
PlantedDataset plant_synthetic(Index n, int n_binary, int n_continuous,
                               const std::vector<Predicate>& planted,
                               double rate_in, double rate_out,
                               std::uint64_t seed);

}  // namespace fairprobe::oracle
