#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stiefeldp/hypergeom.hpp"
#include "stiefeldp/langevin.hpp"
#include "stiefeldp/manifold.hpp"
#include "stiefeldp/rng.hpp"

namespace stiefeldp {

enum class Variant {
  kLocationScale,  // every cluster has its own (G, kappa)
  kLocationOnly,   // clusters share one kappa drawn from the kappa prior
};

/// Independent per-coordinate prior on kappa_i.
struct KappaPrior {
  enum class Kind { kTruncatedExponential, kWeibull, kGamma, kPointMass };

  Kind kind = Kind::kTruncatedExponential;
  double rate = 0.1;   // exponential rate, gamma rate, or the Weibull b
  double shape = 1.0;  // Weibull / gamma shape
  double lower = 5.0;  // truncation point of the exponential
  double point = 0.0;  // location of the point mass

  // rate * exp(-rate (k - lower)) on [lower, inf)
  static KappaPrior truncated_exponential(double rate, double lower);
  // shape * b * k^(shape-1) * exp(-b k^shape)
  static KappaPrior weibull(double shape, double b);
  static KappaPrior gamma(double shape, double rate);
  static KappaPrior point_mass(double value);

  void validate() const;
  bool in_support(double k) const;
  double log_density(double k) const;  // normalized; -inf outside the support
  double draw(Rng& rng) const;
};

struct AlphaHyperprior {
  double shape = 1.0;
  double rate = 1.0;
};

struct PriorSpec {
  double alpha = 1.0;
  KappaPrior kappa_prior;
  Variant variant = Variant::kLocationScale;
  // Gamma hyperprior on alpha; alpha stays fixed when empty.
  std::optional<AlphaHyperprior> alpha_prior;
  // When non-empty the base measure is uniform over these kernels instead of
  // Haar x kappa_prior (location-scale only).
  std::vector<LangevinParams> atoms;

  void validate(int d, int p) const;
};

/// Gibbs chain state. Cluster c has location locations[c]; its concentration
/// is kappas[c] (location-scale) or shared_kappa (location-only, kappas empty).
struct MixtureState {
  std::vector<int> assignments;
  std::vector<StiefelPoint> locations;
  std::vector<Concentration> kappas;
  std::optional<Concentration> shared_kappa;
  std::vector<double> log_normalizers;  // log Z(kappa) per cluster
  double alpha = 1.0;
  long sweep_index = 0;

  int num_clusters() const noexcept { return static_cast<int>(locations.size()); }
  const Concentration& kappa(int c) const;
  LangevinParams params(int c) const;
  std::vector<int> sizes() const;
  // Labels dense in [0, K), every cluster non-empty, parameter arrays consistent.
  void check_invariants(std::size_t n) const;
};

struct StepSizes {
  double g = 0.05;
  double kappa = 0.1;  // sd of the log-scale random walk
};

struct AcceptanceCounters {
  std::uint64_t g_proposed = 0;
  std::uint64_t g_accepted = 0;
  std::uint64_t kappa_proposed = 0;
  std::uint64_t kappa_accepted = 0;

  double g_rate() const { return g_proposed ? static_cast<double>(g_accepted) / g_proposed : 1.0; }
  double kappa_rate() const {
    return kappa_proposed ? static_cast<double>(kappa_accepted) / kappa_proposed : 1.0;
  }
};

struct ChainConfig {
  int iters = 6000;
  int burn_in = 1000;
  int thin = 1;
  int m_aux = 3;
  StepSizes steps;
  std::uint64_t seed = 0;
  HypergeomConfig hypergeom;
};

struct ChainOutput {
  std::vector<MixtureState> states;  // retained, in iteration order
  std::vector<double> log_joint;     // per retained state
  AcceptanceCounters acceptance;
  std::uint64_t seed = 0;
  ChainConfig config;
  PriorSpec prior;
  int n = 0;
  int d = 0;
  int p = 0;
};

using Data = std::vector<StiefelPoint>;

MixtureState init_state(const Data& data, const PriorSpec& prior, Rng& rng,
                        const HypergeomConfig& cfg = {});

// One pass of CRP reassignments using m_aux auxiliary parameter draws for the
// new-cluster option. Labels are compacted to 0..K-1 afterwards.
void reassign_sweep(MixtureState& state, const Data& data, const PriorSpec& prior, int m_aux,
                    Rng& rng, const HypergeomConfig& cfg = {});

// Metropolis-Hastings updates of every cluster location and concentration
// (or exact Gibbs draws when the base measure is discrete).
void update_cluster_params(MixtureState& state, const Data& data, const PriorSpec& prior,
                           const StepSizes& steps, Rng& rng, AcceptanceCounters& counters,
                           const HypergeomConfig& cfg = {});

// Escobar-West update of alpha under its Gamma hyperprior.
void update_alpha(MixtureState& state, const AlphaHyperprior& hyper, Rng& rng);

double log_joint(const MixtureState& state, const Data& data, const PriorSpec& prior);

ChainOutput run_chain(const Data& data, const PriorSpec& prior, const ChainConfig& config);

// counts(i, j) = number of retained states with i and j in the same cluster.
Eigen::MatrixXi coclustering_matrix(const ChainOutput& chain);

// number of clusters with >= min_size members -> number of retained states.
std::map<int, std::size_t> cluster_count_histogram(const ChainOutput& chain, int min_size);

// Rao-Blackwellized posterior predictive log density at x.
double log_predictive(const StiefelPoint& x, const ChainOutput& chain);

// Predictive log density of column `column` on S^{d-1}, averaged over at most
// max_states evenly spaced retained states.
double log_predictive_column(const Vector& v, int column, const ChainOutput& chain,
                             std::size_t max_states = 200);

// Retained state with the largest log joint density.
const MixtureState& map_state(const ChainOutput& chain);

}  // namespace stiefeldp
