#pragma once

#include <vector>

#include "fedgraph/rng.hpp"
#include "fedgraph/types.hpp"

namespace fedgraph::privacy {

// Scales a vector to L2 norm at most c: g * min(1, c / ||g||). An infinite
// c gives a scale factor of exactly 1, leaving the vector bit-identical.
Vec clip_to_norm(const Vec& g, double c);

// Adds N(0, (sigma * c)^2) noise per coordinate. sigma == 0 is an identity
// and consumes no randomness.
void add_gaussian_noise(Vec& g, double sigma, double c, Rng& rng);

// One-step Renyi divergence bound of order alpha for the Poisson-subsampled
// Gaussian mechanism with sampling rate q and noise multiplier sigma:
//   gamma(alpha) = log( sum_{j=0..alpha} C(alpha,j) (1-q)^(alpha-j) q^j
//                       exp(j(j-1) / (2 sigma^2)) ) / (alpha - 1),
// evaluated in log space. q == 1 reduces to alpha / (2 sigma^2).
double rdp_subsampled_gaussian(double q, double sigma, int alpha);

// Integer orders used for the accounting minimization.
std::vector<int> default_alpha_grid();

// epsilon after `steps` compositions at failure probability delta:
// min over the grid of steps * gamma(alpha) + log(1/delta) / (alpha - 1).
// When alpha_star is non-null it receives the minimizing order.
double compose_and_convert(const std::vector<int>& grid,
                           const std::vector<double>& gamma_step, long steps,
                           double delta, int* alpha_star = nullptr);

// Running budget tracker for a fixed mechanism (q, sigma).
class Accountant {
 public:
  Accountant(double q, double sigma, double delta);

  void step(long n = 1);
  long steps() const { return steps_; }
  double epsilon() const { return epsilon_at(steps_); }
  double epsilon_at(long steps) const;
  // Minimizing order and its accumulated divergence at the current step
  // count, for audit output.
  int alpha_star() const;
  double gamma_cum() const;

 private:
  double q_, sigma_, delta_;
  std::vector<int> grid_;
  std::vector<double> gamma_step_;
  long steps_ = 0;
};

// Smallest noise multiplier in [lo, hi] whose epsilon after `steps`
// compositions is at most eps_target, located by bisection to within tol.
double calibrate_sigma(double eps_target, double delta, double q, long steps,
                       double lo = 0.3, double hi = 100.0, double tol = 1e-4);

}  // namespace fedgraph::privacy
