#pragma once

#include <cstdint>

#include "stiefeldp/hypergeom.hpp"
#include "stiefeldp/manifold.hpp"
#include "stiefeldp/rng.hpp"

namespace stiefeldp {

/// Matrix Langevin kernel parameters with F = G diag(kappa). The right
/// orientation H is fixed to I_p and deliberately has no field.
struct LangevinParams {
  LangevinParams(StiefelPoint location, Concentration kappa);

  StiefelPoint location;
  Concentration kappa;

  int d() const noexcept { return location.d(); }
  int p() const noexcept { return location.p(); }
};

// tr(F^T X) = sum_i kappa_i g_i^T x_i.
double log_etr(const Matrix& x, const LangevinParams& params);

// Log density with respect to normalized Haar measure:
//   sum_i kappa_i g_i^T x_i - log 0F1(d/2, kappa^2 / 4).
double log_density(const StiefelPoint& x, const LangevinParams& params,
                   const HypergeomConfig& cfg = {});

enum class SamplerMethod {
  kHaarRejection,    // Haar proposals, envelope exp(sum kappa); needs sum kappa <= 200
  kColumnRejection,  // sequential von Mises-Fisher columns, corrected by rejection
  kAuto,             // Haar rejection when feasible and cheap, column rejection otherwise
};

struct LangevinDraw {
  StiefelPoint x;
  std::uint64_t proposals;
};

inline constexpr double kHaarRejectionLimit = 200.0;

// Exact draw from the matrix Langevin distribution.
LangevinDraw sample(const LangevinParams& params, Rng& rng,
                    SamplerMethod method = SamplerMethod::kHaarRejection);

// Draw from von Mises-Fisher(mean, kappa) on the unit sphere of R^m, m >= 1
// (m = 1 is the two-point sphere {-mean, +mean}).
Vector sample_vmf(const Vector& mean, double kappa, Rng& rng);

struct LangevinMean {
  Matrix mean;        // d x p, inside the convex hull of V_{p,d}
  bool near_uniform;  // propagated from mean_coefficient_matrix
};

// E(X) = F U.
LangevinMean mean(const LangevinParams& params, const HypergeomConfig& cfg = {});

// Log density of column `column` of X on S^{d-1} (normalized uniform measure):
// kappa_j g_j^T v + log 0F1((d-1)/2, S^2/4) - log 0F1(d/2, kappa^2/4), where S
// are the singular values of (I - v v^T) [kappa_k g_k]_{k != j}.
double column_marginal_log_density(const Vector& v, const LangevinParams& params, int column,
                                   const HypergeomConfig& cfg = {});
// As above with log 0F1(d/2, kappa^2/4) supplied by the caller.
double column_marginal_log_density(const Vector& v, const LangevinParams& params, int column,
                                   double log_normalizer, const HypergeomConfig& cfg = {});

}  // namespace stiefeldp
