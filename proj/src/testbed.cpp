#include "fedgraph/eval/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedgraph/errors.hpp"
#include "fedgraph/privacy/privacy.hpp"
#include "fedgraph/rng.hpp"

namespace fedgraph::eval {

void validate_bound_params(const BoundParams& p) {
  if (!(p.mu > 0.0)) throw ParamError("bound: mu must be positive");
  if (!(p.eta > 0.0)) throw ParamError("bound: eta must be positive");
  if (p.d < 1) throw ParamError("bound: dimension must be >= 1");
  if (p.m < 1) throw ParamError("bound: sampled clients must be >= 1");
  if (p.batch < 1) throw ParamError("bound: batch must be >= 1");
  if (!(p.clip > 0.0)) throw ParamError("bound: clip must be positive");
  if (p.sigma < 0.0) throw ParamError("bound: sigma must be >= 0");
  if (p.zeta < 0.0 || p.sigma_g < 0.0)
    throw ParamError("bound: zeta and sigma_g must be >= 0");
}

double theoretical_floor(const BoundParams& p) {
  validate_bound_params(p);
  double m = static_cast<double>(p.m);
  double clip2 = p.clip * p.clip;
  // An unbounded clip only enters the floor through the noise term, and
  // noise is only well defined with a finite sensitivity.
  if (!std::isfinite(clip2) && p.sigma == 0.0) clip2 = 0.0;
  return 4.0 / (p.mu * p.mu) *
         (p.sigma_g * p.sigma_g / (m * static_cast<double>(p.batch)) +
          p.zeta * p.zeta / m +
          static_cast<double>(p.d) * p.sigma * p.sigma * clip2 / m);
}

namespace {

Vec gaussian_vec(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

Vec random_direction(Index n, Rng& rng) {
  Vec v = gaussian_vec(n, rng);
  double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace

TestbedResult quadratic_testbed(const BoundParams& p, int clients, int rounds,
                                std::uint64_t seed, int replicates,
                                double w0_dist) {
  validate_bound_params(p);
  if (clients < p.m)
    throw ParamError("testbed: " + std::to_string(clients) +
                     " clients but m = " + std::to_string(p.m));
  if (rounds < 1) throw ParamError("testbed: rounds must be >= 1");
  if (replicates < 1) throw ParamError("testbed: replicates must be >= 1");
  if (!(w0_dist >= 0.0)) throw ParamError("testbed: w0 distance must be >= 0");

  Index d = static_cast<Index>(p.d);
  TestbedResult result;
  result.floor = theoretical_floor(p);
  result.mean_sq_dist.assign(static_cast<std::size_t>(rounds) + 1, 0.0);

  for (int rep = 0; rep < replicates; ++rep) {
    Rng rng(derive_seed(seed, 0x7E57, static_cast<std::uint64_t>(rep)));

    // Client optima average to w* = 0: pair each offset with its negation.
    std::vector<Vec> optima(static_cast<std::size_t>(clients),
                            Vec::Zero(d));
    if (p.zeta > 0.0) {
      for (int i = 0; i + 1 < clients; i += 2) {
        Vec offset = p.zeta * random_direction(d, rng);
        optima[static_cast<std::size_t>(i)] = offset;
        optima[static_cast<std::size_t>(i + 1)] = -offset;
      }
    }

    Vec w = w0_dist * random_direction(d, rng);
    result.mean_sq_dist[0] += w.squaredNorm();

    std::vector<int> ids(static_cast<std::size_t>(clients));
    std::iota(ids.begin(), ids.end(), 0);
    for (int round = 1; round <= rounds; ++round) {
      std::shuffle(ids.begin(), ids.end(), rng);
      Vec update = Vec::Zero(d);
      for (int k = 0; k < p.m; ++k) {
        int c = ids[static_cast<std::size_t>(k)];
        Vec g = p.mu * (w - optima[static_cast<std::size_t>(c)]);
        if (p.sigma_g > 0.0)
          g += (p.sigma_g / std::sqrt(static_cast<double>(p.batch))) *
               gaussian_vec(d, rng);
        g = privacy::clip_to_norm(g, p.clip);
        if (p.sigma > 0.0) privacy::add_gaussian_noise(g, p.sigma, p.clip, rng);
        update -= p.eta * g;
      }
      w += update / static_cast<double>(p.m);
      result.mean_sq_dist[static_cast<std::size_t>(round)] += w.squaredNorm();
    }
  }

  for (double& v : result.mean_sq_dist) v /= static_cast<double>(replicates);
  return result;
}

}  // namespace fedgraph::eval
