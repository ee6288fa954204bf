#include "fedgraph/privacy/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedgraph/errors.hpp"

namespace fedgraph::privacy {

Vec clip_to_norm(const Vec& g, double c) {
  if (!(c > 0.0))
    throw ParamError("clip_to_norm: bound " + std::to_string(c) +
                     " must be positive");
  double norm = g.norm();
  double scale = norm > 0.0 ? std::min(1.0, c / norm) : 1.0;
  return g * scale;
}

void add_gaussian_noise(Vec& g, double sigma, double c, Rng& rng) {
  if (sigma < 0.0)
    throw ParamError("add_gaussian_noise: sigma " + std::to_string(sigma) +
                     " must be >= 0");
  if (!(c > 0.0) || !std::isfinite(c))
    throw ParamError("add_gaussian_noise: sensitivity " + std::to_string(c) +
                     " must be positive and finite");
  if (sigma == 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma * c);
  for (Index i = 0; i < g.size(); ++i) g(i) += normal(rng);
}

namespace {

double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}

}  // namespace

double rdp_subsampled_gaussian(double q, double sigma, int alpha) {
  if (!(sigma > 0.0))
    throw AccountingError("rdp: sigma must be positive, got " +
                          std::to_string(sigma));
  if (!(q >= 0.0 && q <= 1.0))
    throw ParamError("rdp: sampling rate " + std::to_string(q) +
                     " outside [0, 1]");
  if (alpha < 2)
    throw ParamError("rdp: order " + std::to_string(alpha) + " must be >= 2");
  if (q == 0.0) return 0.0;
  double s2 = sigma * sigma;
  if (q == 1.0) return static_cast<double>(alpha) / (2.0 * s2);

  // log-sum-exp over the binomial expansion; the j = alpha term dominates
  // for large alpha, so everything stays in log space.
  double log_q = std::log(q);
  double log_1mq = std::log1p(-q);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<std::size_t>(alpha) + 1);
  for (int j = 0; j <= alpha; ++j) {
    double t = log_binom(alpha, j) + (alpha - j) * log_1mq + j * log_q +
               static_cast<double>(j) * (j - 1) / (2.0 * s2);
    terms[static_cast<std::size_t>(j)] = t;
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  double log_sum = max_term + std::log(sum);
  // The mixture bound is >= 0; tiny negative values are rounding noise.
  return std::max(0.0, log_sum / (alpha - 1));
}

std::vector<int> default_alpha_grid() {
  std::vector<int> grid;
  for (int a = 2; a <= 256; ++a) grid.push_back(a);
  return grid;
}

double compose_and_convert(const std::vector<int>& grid,
                           const std::vector<double>& gamma_step, long steps,
                           double delta, int* alpha_star) {
  if (grid.empty() || grid.size() != gamma_step.size())
    throw ShapeError("compose_and_convert: grid of " +
                     std::to_string(grid.size()) + " orders with " +
                     std::to_string(gamma_step.size()) + " divergences");
  if (!(delta > 0.0 && delta < 1.0))
    throw ParamError("compose_and_convert: delta " + std::to_string(delta) +
                     " outside (0, 1)");
  if (steps < 0)
    throw ParamError("compose_and_convert: negative step count");
  double log_inv_delta = std::log(1.0 / delta);
  double best = std::numeric_limits<double>::infinity();
  int best_alpha = grid[0];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double eps = static_cast<double>(steps) * gamma_step[i] +
                 log_inv_delta / (grid[i] - 1);
    if (eps < best) {
      best = eps;
      best_alpha = grid[i];
    }
  }
  if (alpha_star) *alpha_star = best_alpha;
  return best;
}

Accountant::Accountant(double q, double sigma, double delta)
    : q_(q), sigma_(sigma), delta_(delta), grid_(default_alpha_grid()) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ParamError("accountant: delta " + std::to_string(delta) +
                     " outside (0, 1)");
  gamma_step_.reserve(grid_.size());
  for (int a : grid_) gamma_step_.push_back(rdp_subsampled_gaussian(q, sigma, a));
}

void Accountant::step(long n) {
  if (n < 0) throw ParamError("accountant: negative step increment");
  steps_ += n;
}

double Accountant::epsilon_at(long steps) const {
  return compose_and_convert(grid_, gamma_step_, steps, delta_);
}

int Accountant::alpha_star() const {
  int a = 0;
  compose_and_convert(grid_, gamma_step_, steps_, delta_, &a);
  return a;
}

double Accountant::gamma_cum() const {
  int a = alpha_star();
  for (std::size_t i = 0; i < grid_.size(); ++i)
    if (grid_[i] == a) return static_cast<double>(steps_) * gamma_step_[i];
  return 0.0;
}

double calibrate_sigma(double eps_target, double delta, double q, long steps,
                       double lo, double hi, double tol) {
  if (!(eps_target > 0.0))
    throw ParamError("calibrate_sigma: target epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ParamError("calibrate_sigma: delta " + std::to_string(delta) +
                     " outside (0, 1)");
  if (steps <= 0)
    throw ParamError("calibrate_sigma: steps must be >= 1");
  if (!(lo > 0.0 && hi > lo))
    throw ParamError("calibrate_sigma: bad bracket [" + std::to_string(lo) +
                     ", " + std::to_string(hi) + "]");
  auto grid = default_alpha_grid();
  auto eps_of = [&](double sigma) {
    std::vector<double> gamma;
    gamma.reserve(grid.size());
    for (int a : grid) gamma.push_back(rdp_subsampled_gaussian(q, sigma, a));
    return compose_and_convert(grid, gamma, steps, delta);
  };
  if (eps_of(hi) > eps_target)
    throw AccountingError(
        "calibrate_sigma: epsilon " + std::to_string(eps_target) +
        " unattainable with sigma <= " + std::to_string(hi));
  if (eps_of(lo) <= eps_target) return lo;
  double lo_x = lo, hi_x = hi;
  while (hi_x - lo_x > tol) {
    double mid = 0.5 * (lo_x + hi_x);
    if (eps_of(mid) <= eps_target)
      hi_x = mid;
    else
      lo_x = mid;
  }
  return hi_x;
}

}  // namespace fedgraph::privacy
