#include "fairprobe/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fairprobe::objective {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Indices of the (m - k) penalizable columns with the smallest |w|, ties by
// column index ascending. Validates k against m.
std::vector<Eigen::Index> smallest_set(const Eigen::VectorXd& w, int k,
                                       const std::vector<bool>& penalizable) {
  if (static_cast<Eigen::Index>(penalizable.size()) != w.size())
    throw std::invalid_argument("penalizable mask size does not match weights");
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  std::vector<std::pair<double, Eigen::Index>> by_abs;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (penalizable[j]) by_abs.emplace_back(std::abs(w[j]), j);
  const int m = static_cast<int>(by_abs.size());
  if (k > m)
    throw std::invalid_argument("k (" + std::to_string(k) +
                                ") exceeds penalizable column count (" +
                                std::to_string(m) + ")");
  std::sort(by_abs.begin(), by_abs.end());
  std::vector<Eigen::Index> out;
  out.reserve(m - k);
  for (int i = 0; i < m - k; ++i) out.push_back(by_abs[i].second);
  return out;
}

}  // namespace

double dscore_hard(const BoolArray& fav, const BoolArray& members) {
  if (fav.size() != members.size())
    throw std::invalid_argument("fav and members lengths differ");
  const Index n = fav.size();
  const Index s = members.count();
  if (s == 0 || s == n)
    throw std::invalid_argument("degenerate partition: group holds 0 or all rows");
  const Index fav_in = (fav && members).count();
  const Index fav_out = fav.count() - fav_in;
  return static_cast<double>(fav_out) / static_cast<double>(n - s) -
         static_cast<double>(fav_in) / static_cast<double>(s);
}

Eigen::ArrayXd membership(const dataset::FeatureMatrix& fm,
                          const Eigen::VectorXd& theta) {
  if (theta.size() != fm.columns.cols())
    throw std::invalid_argument("theta has " + std::to_string(theta.size()) +
                                " entries, feature matrix has " +
                                std::to_string(fm.columns.cols()) + " columns");
  const Eigen::ArrayXd z = (fm.columns * theta).array();
  return 1.0 / (1.0 + (-z).exp());
}

double expected_dscore(const BoolArray& fav, const Eigen::ArrayXd& p,
                       double eps_denom) {
  if (fav.size() != p.size())
    throw std::invalid_argument("fav and p lengths differ");
  const Eigen::ArrayXd favd = fav.cast<double>();
  const double A = (favd * p).sum();
  const double B = p.sum();
  const double Y = favd.sum();
  const double N = static_cast<double>(fav.size());
  return (Y - A) / std::max(N - B, eps_denom) - A / std::max(B, eps_denom);
}

double penalty_topk(const Eigen::VectorXd& w, int k,
                    const std::vector<bool>& penalizable) {
  const auto small = smallest_set(w, k, penalizable);
  if (small.empty()) return 0.0;
  double sum = 0.0;
  for (Eigen::Index j : small) sum += std::abs(w[j]);
  return sum / static_cast<double>(small.size());
}

double size_ratio(const Eigen::ArrayXd& p) {
  if (p.size() == 0) throw std::invalid_argument("empty membership vector");
  return p.sum() / static_cast<double>(p.size());
}

std::vector<bool> penalizable_mask(const dataset::FeatureMatrix& fm) {
  std::vector<bool> mask(fm.colmap.size());
  for (std::size_t j = 0; j < fm.colmap.size(); ++j)
    mask[j] = fm.colmap[j].attribute != dataset::kIntercept;
  return mask;
}

Eval evaluate(const BoolArray& fav, const dataset::FeatureMatrix& fm,
              const Eigen::VectorXd& theta, const ObjectiveConfig& cfg) {
  const Eigen::ArrayXd p = membership(fm, theta);
  const auto mask = penalizable_mask(fm);

  Eval ev;
  const double E = expected_dscore(fav, p, cfg.eps_denom);
  const double C = penalty_topk(theta, cfg.k, mask);
  const double r = size_ratio(p);
  const double lo = std::max(0.0, cfg.alpha - r);
  const double hi = std::max(0.0, r - cfg.beta);
  ev.value = E - cfg.lambda * C - cfg.mu * (lo * lo + hi * hi);

  // d(expected)/dtheta via the ratio-of-sums quotient rule, with the clamped
  // denominators held constant once a guard engages.
  const Eigen::ArrayXd favd = fav.cast<double>();
  const Eigen::ArrayXd w = p * (1.0 - p);
  const Eigen::VectorXd dA = fm.columns.transpose() * (favd * w).matrix();
  const Eigen::VectorXd dB = fm.columns.transpose() * w.matrix();
  const double A = (favd * p).sum();
  const double B = p.sum();
  const double Y = favd.sum();
  const double N = static_cast<double>(fav.size());

  Eigen::VectorXd g;
  if (N - B > cfg.eps_denom)
    g = (-dA * (N - B) + (Y - A) * dB) / ((N - B) * (N - B));
  else
    g = -dA / cfg.eps_denom;
  if (B > cfg.eps_denom)
    g -= (dA * B - A * dB) / (B * B);
  else
    g -= dA / cfg.eps_denom;

  const int m = static_cast<int>(std::count(mask.begin(), mask.end(), true));
  if (cfg.k < m) {
    const auto small = smallest_set(theta, cfg.k, mask);
    for (Eigen::Index j : small)
      g[j] -= cfg.lambda * sgn(theta[j]) / static_cast<double>(m - cfg.k);
  }

  const Eigen::VectorXd dr = dB / N;
  g += (cfg.mu * 2.0 * (lo - hi)) * dr;

  ev.grad = std::move(g);
  return ev;
}

double penalized_objective(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                           const Eigen::VectorXd& theta,
                           const ObjectiveConfig& cfg) {
  return evaluate(fav, fm, theta, cfg).value;
}

Eigen::VectorXd gradient(const BoolArray& fav, const dataset::FeatureMatrix& fm,
                         const Eigen::VectorXd& theta,
                         const ObjectiveConfig& cfg) {
  return evaluate(fav, fm, theta, cfg).grad;
}

}  // namespace fairprobe::objective
