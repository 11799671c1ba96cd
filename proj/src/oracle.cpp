#include "fairprobe/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fairprobe/rng.hpp"

namespace fairprobe::oracle {

bool eval_predicate(const dataset::Dataset& data, const Predicate& pred,
                    Index row) {
  if (pred.attribute < 0 || pred.attribute >= static_cast<Index>(data.schema.size()))
    throw std::out_of_range("predicate attribute out of range");
  if (row < 0 || row >= data.n) throw std::out_of_range("row out of range");
  const auto& spec = data.schema[pred.attribute];
  if (pred.form == Predicate::Form::cat_eq) {
    if (spec.kind != dataset::AttrKind::categorical)
      throw std::invalid_argument("equality predicate on a continuous attribute");
    const auto& codes = std::get<std::vector<std::int32_t>>(data.columns[pred.attribute]);
    return codes[row] == pred.value;
  }
  if (spec.kind != dataset::AttrKind::continuous)
    throw std::invalid_argument("threshold predicate on a categorical attribute");
  const auto& reals = std::get<Eigen::VectorXd>(data.columns[pred.attribute]);
  return pred.form == Predicate::Form::cont_gt ? reals[row] > pred.threshold
                                               : reals[row] <= pred.threshold;
}

EnumResult enum_search(const dataset::Dataset& data, int k, double alpha,
                       double beta, double time_budget_secs) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(alpha >= 0.0 && alpha <= beta && beta <= 1.0))
    throw std::invalid_argument("need 0 <= alpha <= beta <= 1");
  if (time_budget_secs <= 0.0)
    throw std::invalid_argument("time budget must be positive");

  const Index n = data.n;
  std::vector<Index> sens;
  for (Index ai = 0; ai < static_cast<Index>(data.schema.size()); ++ai)
    if (data.schema[ai].sensitive) sens.push_back(ai);
  if (sens.empty()) throw std::invalid_argument("no sensitive attributes");

  // Atoms per sensitive attribute, in the enumeration order used for
  // tie-breaking: declared values for categorical attributes; for continuous
  // ones both directions at each unique observed value, ascending.
  std::vector<std::vector<Predicate>> atoms(sens.size());
  for (std::size_t a = 0; a < sens.size(); ++a) {
    const Index ai = sens[a];
    const auto& spec = data.schema[ai];
    if (spec.kind == dataset::AttrKind::categorical) {
      for (std::int32_t v = 0; v < static_cast<std::int32_t>(spec.values.size()); ++v)
        atoms[a].push_back({ai, Predicate::Form::cat_eq, v, 0.0});
    } else {
      const auto& reals = std::get<Eigen::VectorXd>(data.columns[ai]);
      std::vector<double> uniq(reals.data(), reals.data() + reals.size());
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (double t : uniq) {
        atoms[a].push_back({ai, Predicate::Form::cont_gt, -1, t});
        atoms[a].push_back({ai, Predicate::Form::cont_leq, -1, t});
      }
    }
  }

  // Column access resolved once per candidate, keeping the row loop flat.
  struct ResolvedAtom {
    bool categorical;
    const std::int32_t* codes;
    const double* reals;
    std::int32_t value;
    double threshold;
    bool gt;
  };
  const auto resolve = [&](const Predicate& p) {
    ResolvedAtom r{};
    if (p.form == Predicate::Form::cat_eq) {
      r.categorical = true;
      r.codes = std::get<std::vector<std::int32_t>>(data.columns[p.attribute]).data();
      r.value = p.value;
    } else {
      r.reals = std::get<Eigen::VectorXd>(data.columns[p.attribute]).data();
      r.threshold = p.threshold;
      r.gt = p.form == Predicate::Form::cont_gt;
    }
    return r;
  };
  const auto hit = [](const ResolvedAtom& r, Index i) {
    if (r.categorical) return r.codes[i] == r.value;
    return r.gt ? r.reals[i] > r.threshold : r.reals[i] <= r.threshold;
  };

  const Index fav_total = data.fav.count();
  EnumResult res;
  res.members = BoolArray::Constant(n, false);
  double best = -2.0;  // below any reachable value

  const auto start = std::chrono::steady_clock::now();
  const auto expired = [&] {
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
    return el.count() > time_budget_secs;
  };

  std::vector<bool> row_buf(n);
  const int j_max = std::min<int>(k, static_cast<int>(sens.size()));
  std::vector<ResolvedAtom> resolved(j_max);
  for (int j = 1; j <= j_max; ++j) {
    // Lexicographic j-subsets of the attribute list.
    std::vector<int> comb(j);
    for (int i = 0; i < j; ++i) comb[i] = i;
    while (true) {
      std::vector<int> choice(j, 0);
      while (true) {
        if (expired()) {
          res.exhausted_budget = true;
          return res;
        }
        ++res.explored;

        for (int q = 0; q < j; ++q)
          resolved[q] = resolve(atoms[comb[q]][choice[q]]);

        Index cnt = 0, fav_in = 0;
        for (Index i = 0; i < n; ++i) {
          bool m = true;
          for (int q = 0; q < j && m; ++q) m = hit(resolved[q], i);
          row_buf[i] = m;
          if (m) {
            ++cnt;
            fav_in += data.fav[i] ? 1 : 0;
          }
        }
        const double ratio = static_cast<double>(cnt) / static_cast<double>(n);
        if (cnt > 0 && cnt < n && ratio >= alpha && ratio <= beta) {
          const double d =
              static_cast<double>(fav_total - fav_in) / static_cast<double>(n - cnt) -
              static_cast<double>(fav_in) / static_cast<double>(cnt);
          if (d > best) {
            best = d;
            res.dscore = d;
            res.predicates.clear();
            for (int q = 0; q < j; ++q)
              res.predicates.push_back(atoms[comb[q]][choice[q]]);
            for (Index i = 0; i < n; ++i) res.members[i] = row_buf[i];
          }
        }

        // Advance the per-attribute atom odometer.
        int pos = j - 1;
        while (pos >= 0) {
          if (++choice[pos] < static_cast<int>(atoms[comb[pos]].size())) break;
          choice[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
      }

      // Next combination.
      int pos = j - 1;
      while (pos >= 0 && comb[pos] == static_cast<int>(sens.size()) - j + pos) --pos;
      if (pos < 0) break;
      ++comb[pos];
      for (int q = pos + 1; q < j; ++q) comb[q] = comb[q - 1] + 1;
    }
  }
  return res;
}

PlantedDataset plant_synthetic(Index n, int n_binary, int n_continuous,
                               const std::vector<Predicate>& planted,
                               double rate_in, double rate_out,
                               std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least 2 rows");
  if (n_binary < 0 || n_continuous < 0 || n_binary + n_continuous < 1)
    throw std::invalid_argument("need at least one attribute");
  if (!(rate_in >= 0.0 && rate_in < rate_out && rate_out <= 1.0))
    throw std::invalid_argument("need 0 <= rate_in < rate_out <= 1");
  const Index n_attrs = n_binary + n_continuous;
  for (const auto& pred : planted) {
    if (pred.attribute < 0 || pred.attribute >= n_attrs)
      throw std::invalid_argument("planted predicate outside the schema");
    const bool is_binary = pred.attribute < n_binary;
    if (is_binary && pred.form != Predicate::Form::cat_eq)
      throw std::invalid_argument("binary attributes take equality predicates");
    if (is_binary && pred.value != 0 && pred.value != 1)
      throw std::invalid_argument("binary attribute values are 0 and 1");
    if (!is_binary && pred.form == Predicate::Form::cat_eq)
      throw std::invalid_argument("continuous attributes take threshold predicates");
  }

  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(seed + attempt);
    dataset::Dataset d;
    d.n = n;
    for (int b = 0; b < n_binary; ++b) {
      dataset::AttributeSpec spec;
      spec.name = "b" + std::to_string(b);
      spec.kind = dataset::AttrKind::categorical;
      spec.values = {"0", "1"};
      d.schema.push_back(std::move(spec));
      std::vector<std::int32_t> codes(n);
      for (Index i = 0; i < n; ++i) codes[i] = rng.bernoulli(0.5) ? 1 : 0;
      d.columns.emplace_back(std::move(codes));
    }
    for (int c = 0; c < n_continuous; ++c) {
      dataset::AttributeSpec spec;
      spec.name = "c" + std::to_string(c);
      spec.kind = dataset::AttrKind::continuous;
      d.schema.push_back(std::move(spec));
      Eigen::VectorXd col(n);
      for (Index i = 0; i < n; ++i) col[i] = rng.uniform();
      d.columns.emplace_back(std::move(col));
    }

    BoolArray mask(n);
    for (Index i = 0; i < n; ++i) {
      bool m = true;
      for (const auto& pred : planted) m = m && eval_predicate(d, pred, i);
      mask[i] = m;
    }
    if (mask.count() == 0) continue;  // resample from the next seed

    d.fav = BoolArray(n);
    for (Index i = 0; i < n; ++i)
      d.fav[i] = rng.bernoulli(mask[i] ? rate_in : rate_out);
    return {std::move(d), std::move(mask)};
  }
  throw std::runtime_error("planted group stayed empty after 100 attempts");
}

}  // namespace fairprobe::oracle
