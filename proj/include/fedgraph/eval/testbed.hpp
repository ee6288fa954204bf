#pragma once

#include <cstdint>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::eval {

// Constants of the strongly convex convergence bound
//   E||w_L - w*||^2 <= (1 - eta mu / 2)^L ||w_0 - w*||^2
//                      + (4 / mu^2) (sigma_g^2 / (m B) + zeta^2 / m
//                                    + d sigma^2 C^2 / m).
struct BoundParams {
  double mu = 1.0;          // strong convexity
  double lips = 1.0;        // smoothness (carried, not used by the floor)
  double grad_bound = 1.0;  // gradient norm bound (carried, not used)
  double zeta = 0.0;        // client heterogeneity
  double sigma_g = 0.0;     // within-client gradient noise
  long d = 1;               // parameter dimension
  int m = 1;                // sampled clients per round
  int batch = 1;            // local batch size
  double clip = 1.0;        // clipping bound C
  double sigma = 0.0;       // noise multiplier
  double eta = 0.1;         // learning rate
};

void validate_bound_params(const BoundParams& p);

// The additive term of the bound: the plateau the iterates cannot beat.
double theoretical_floor(const BoundParams& p);

struct TestbedResult {
  // mean over replicates of ||w_round - w*||^2, entry 0 is the start.
  std::vector<double> mean_sq_dist;
  double floor = 0.0;
};

// Simulates noisy federated averaging on quadratic client objectives
// f_i(w) = (mu/2) ||w - c_i||^2 with optima spread ||c_i|| ~ zeta, gradient
// noise sigma_g / sqrt(batch), per-step clipping at C and Gaussian noise
// sigma C on each sampled client's update. `clients` must be >= p.m; each
// round samples p.m of them. w_0 starts at distance w0_dist from the
// average optimum w* = 0.
TestbedResult quadratic_testbed(const BoundParams& p, int clients, int rounds,
                                std::uint64_t seed, int replicates = 20,
                                double w0_dist = 20.0);

}  // namespace fedgraph::eval
