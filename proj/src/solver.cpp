#include "fairprobe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "fairprobe/rng.hpp"

namespace fairprobe::solver {

Eigen::VectorXd clip_to_norm(Eigen::VectorXd g, double max_norm) {
  const double nrm = g.norm();
  if (nrm > max_norm) g *= max_norm / nrm;
  return g;
}

OptimizeResult optimize(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                        const objective::ObjectiveConfig& obj_cfg,
                        const SolverConfig& cfg) {
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.iterations <= 0) throw std::invalid_argument("iterations must be positive");
  if (cfg.clip_norm <= 0.0) throw std::invalid_argument("clip_norm must be positive");
  if (cfg.penalty_rounds <= 0) throw std::invalid_argument("penalty_rounds must be positive");
  if (cfg.iterations % cfg.penalty_rounds != 0)
    throw std::invalid_argument("iterations must divide evenly into penalty rounds");
  if (cfg.mu_init <= 0.0 || cfg.mu_growth <= 0.0)
    throw std::invalid_argument("penalty schedule must be positive");
  if (cfg.init_scale <= 0.0) throw std::invalid_argument("init_scale must be positive");
  const Index d = fm.columns.cols();
  if (d < 1) throw std::invalid_argument("feature matrix has no columns");

  Rng rng(cfg.seed);
  Eigen::VectorXd theta(d);
  for (Index j = 0; j < d; ++j) theta[j] = cfg.init_scale * rng.normal();

  OptimizeResult res;
  res.trace.reserve(cfg.iterations);

  auto round_cfg = obj_cfg;
  round_cfg.mu = cfg.mu_init;
  const int per_round = cfg.iterations / cfg.penalty_rounds;
  int iter = 0;
  for (int round = 0; round < cfg.penalty_rounds; ++round) {
    for (int step = 0; step < per_round; ++step, ++iter) {
      auto ev = objective::evaluate(fav, fm, theta, round_cfg);
      if (!std::isfinite(ev.value)) throw SolverError(iter, std::move(theta));
      res.trace.push_back(ev.value);
      theta += cfg.learning_rate * clip_to_norm(std::move(ev.grad), cfg.clip_norm);
    }
    round_cfg.mu *= cfg.mu_growth;
  }
  res.theta = std::move(theta);
  return res;
}

Eigen::VectorXd truncate_topk(const Eigen::VectorXd& theta, int k,
                              const std::vector<dataset::ColumnInfo>& colmap,
                              KGrouping grouping) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (static_cast<Index>(colmap.size()) != theta.size())
    throw std::invalid_argument("colmap size does not match weights");

  // Penalizable columns by |w| descending, ties to the lower column index.
  std::vector<Index> ranking;
  for (Index j = 0; j < theta.size(); ++j)
    if (colmap[j].attribute != dataset::kIntercept) ranking.push_back(j);
  std::sort(ranking.begin(), ranking.end(), [&](Index a, Index b) {
    const double aa = std::abs(theta[a]), ab = std::abs(theta[b]);
    if (aa != ab) return aa > ab;
    return a < b;
  });

  std::vector<bool> keep(theta.size(), false);
  if (grouping == KGrouping::column) {
    for (std::size_t r = 0; r < ranking.size() && r < static_cast<std::size_t>(k); ++r)
      keep[ranking[r]] = true;
  } else {
    std::vector<Index> collected;
    for (Index j : ranking) {
      const Index attr = colmap[j].attribute;
      if (std::find(collected.begin(), collected.end(), attr) == collected.end()) {
        if (static_cast<int>(collected.size()) == k) break;
        collected.push_back(attr);
      }
    }
    for (Index j = 0; j < theta.size(); ++j)
      keep[j] = std::find(collected.begin(), collected.end(),
                          colmap[j].attribute) != collected.end();
  }

  Eigen::VectorXd out = theta;
  for (Index j = 0; j < out.size(); ++j)
    if (colmap[j].attribute != dataset::kIntercept && !keep[j]) out[j] = 0.0;
  return out;
}

Evidence derive_evidence(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                         const Eigen::VectorXd& theta,
                         const objective::ObjectiveConfig& obj_cfg,
                         const std::vector<dataset::AttributeSpec>& schema) {
  const Eigen::ArrayXd p = objective::membership(fm, theta);
  const Index n = p.size();

  Evidence ev;
  ev.theta_star = theta;
  ev.members = (p >= 0.5);
  const Index s = ev.members.count();
  ev.size_ratio = static_cast<double>(s) / static_cast<double>(n);
  const bool split = s > 0 && s < n;
  if (split) ev.dscore = objective::dscore_hard(fav, ev.members);
  ev.constraint_ok =
      split && obj_cfg.alpha <= ev.size_ratio && ev.size_ratio <= obj_cfg.beta;

  // Attributes owning a non-zero column, strongest first; ties keep the one
  // whose peak column comes first.
  struct Peak {
    double max_abs = 0.0;
    Index col = 0;
  };
  std::map<Index, Peak> peaks;
  for (Index j = 0; j < theta.size(); ++j) {
    const auto& info = fm.colmap[j];
    if (info.attribute == dataset::kIntercept || theta[j] == 0.0) continue;
    auto [it, fresh] = peaks.try_emplace(info.attribute, Peak{std::abs(theta[j]), j});
    if (!fresh && std::abs(theta[j]) > it->second.max_abs)
      it->second = {std::abs(theta[j]), j};
  }
  std::vector<std::pair<Index, Peak>> order(peaks.begin(), peaks.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.max_abs != b.second.max_abs)
      return a.second.max_abs > b.second.max_abs;
    return a.second.col < b.second.col;
  });
  for (const auto& [attr, peak] : order)
    ev.key_attributes.push_back(schema[attr].name);
  return ev;
}

}  // namespace fairprobe::solver
