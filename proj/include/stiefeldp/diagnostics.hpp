#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "stiefeldp/hypergeom.hpp"
#include "stiefeldp/langevin.hpp"
#include "stiefeldp/manifold.hpp"
#include "stiefeldp/mixture.hpp"
#include "stiefeldp/rng.hpp"

namespace stiefeldp {

/// A log density on V_{p,d} w.r.t. normalized Haar measure. The sampler is
/// optional; when present it must draw from the same density, so the handle
/// can serve as an importance proposal.
struct DensityHandle {
  int d = 0;
  int p = 0;
  std::function<double(const StiefelPoint&)> log_density;
  std::function<StiefelPoint(Rng&)> sampler;
  std::vector<StiefelPoint> modes;  // high-density points, used as extra probes

  bool can_sample() const { return static_cast<bool>(sampler); }

  static DensityHandle uniform(int d, int p);
  static DensityHandle langevin(const LangevinParams& params, const HypergeomConfig& cfg = {});
  // Finite mixture; weights are normalized internally.
  static DensityHandle mixture(std::vector<DensityHandle> parts, std::vector<double> weights);
  static DensityHandle langevin_mixture(const std::vector<LangevinParams>& params, std::vector<double> weights,
                                        const HypergeomConfig& cfg = {});
  // Posterior predictive of a chain, using at most max_states evenly spaced states.
  static DensityHandle predictive(const ChainOutput& chain, std::size_t max_states = 200);
};

struct McEstimateResult {
  double estimate = 0.0;
  double std_error = 0.0;
  bool clamped = false;  // negative radicand from noise was clamped to 0
};

// sqrt(1/2 int (sqrt f - sqrt g)^2) by importance sampling from `proposal`
// (Haar when null). Delta-method standard error.
McEstimateResult hellinger_mc(const DensityHandle& f, const DensityHandle& g, std::size_t n_samples, Rng& rng,
                              const DensityHandle* proposal = nullptr);

// int f0 log(f0 / f) by importance sampling from `proposal` (Haar when null).
McEstimateResult kl_mc(const DensityHandle& f0, const DensityHandle& f, std::size_t n_samples, Rng& rng,
                       const DensityHandle* proposal = nullptr);

struct KernelApproxResult {
  double error = 0.0;      // max |f(X) - (K_kappa f)(X)| over probes
  double max_inner_se = 0.0;
  std::size_t probes = 0;
};

// (K_kappa f)(X) = int g(X, G, kappa) f(G) dG is estimated with n_inner draws
// G ~ Langevin(X, kappa), which is exact because the kernel is symmetric in
// (X, G). Probes are n_outer Haar points plus f's modes; the max is a lower
// bound for the sup.
KernelApproxResult kernel_approx_error(const DensityHandle& f, const Concentration& kappa, std::size_t n_outer,
                                       std::size_t n_inner, Rng& rng, const HypergeomConfig& cfg = {});

// |g(X, G1, kappa) - g(X, G2, kappa)| / ||G1 - G2||_F
double location_difference_ratio(const StiefelPoint& x, const StiefelPoint& g1, const StiefelPoint& g2,
                                  const Concentration& kappa, const HypergeomConfig& cfg = {});
// |g(X, G, k1) - g(X, G, k2)| / ||k1 - k2||_2
double concentration_difference_ratio(const StiefelPoint& x, const StiefelPoint& g, const Concentration& k1,
                                      const Concentration& k2, const HypergeomConfig& cfg = {});

// Max location ratio over `trials` triples: half uniformly random, half with
// X near G1 and G2 a small perturbation of G1. Coincident pairs are skipped.
double lipschitz_ratio_location(int d, const Concentration& kappa, std::size_t trials, Rng& rng,
                                const HypergeomConfig& cfg = {});

// Max concentration ratio over `trials` draws with phi(kappa), phi(kappa~) <= k_bound.
double lipschitz_ratio_concentration(int d, int p, double k_bound, std::size_t trials, Rng& rng,
                                     const HypergeomConfig& cfg = {});

// sqrt(sum (kappa_i + 1)^2)
double phi(const Concentration& kappa);

struct TailCheck {
  long n = 0;
  double threshold = 0.0;  // n^a
  double mass = 0.0;       // estimated prior mass of {phi(kappa) > n^a}
  double bound = 0.0;      // exp(-n beta)
  bool pass = false;
};

// Requires 0 < a < 1 / ((p + 2) d p).
std::vector<TailCheck> tail_condition_check(const KappaPrior& prior, int d, int p, double a, double beta,
                                            const std::vector<long>& n_grid, Rng& rng,
                                            std::size_t draws = 1000000);

// Least-squares slope of log y on log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stiefeldp
