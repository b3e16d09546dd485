#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>

#include "stiefeldp/manifold.hpp"
#include "stiefeldp/rng.hpp"

namespace stiefeldp {

/// Concentration parameters kappa_1..kappa_p of a matrix Langevin kernel.
/// Entries are finite and non-negative; kappa = 0 is the uniform limit.
class Concentration {
 public:
  explicit Concentration(Vector values);
  Concentration(std::initializer_list<double> values);
  static Concentration zeros(int p);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_(i); }
  const Vector& values() const noexcept { return values_; }
  double sum() const { return values_.sum(); }

 private:
  Vector values_;
};

struct HypergeomConfig {
  // Minimum total partition weight of the zonal series. The evaluator raises
  // it automatically for large arguments and escalates when the tail check fails.
  int truncation_order = 60;
  std::size_t mc_samples = 100000;
};

struct SeriesValue {
  double log_value;
  int order;  // truncation order actually used
};

// log 0F1(half_d; diag(kappa_1^2, ..., kappa_p^2) / 4), real case (alpha = 2).
// Requires half_d >= p/2 and p <= 4. Throws TruncationError when the last
// order still carries more than 1e-12 of the mass at the largest supported order.
double log_0f1(double half_d, const Concentration& kappa, const HypergeomConfig& cfg = {});
SeriesValue log_0f1_detailed(double half_d, const Concentration& kappa,
                             const HypergeomConfig& cfg = {});

// Same series without the value cache; for hot loops over continuous arguments.
SeriesValue log_0f1_uncached(double half_d, const Concentration& kappa,
                             const HypergeomConfig& cfg = {});

// Largest truncation order the evaluator builds for a given p.
int max_truncation_order(int p);

void clear_hypergeom_cache();
std::size_t hypergeom_cache_size();

struct McEstimate {
  double estimate;
  double std_error;
};

// Sample mean and standard error of etr(F^T X), F = G diag(kappa), X ~ Haar.
McEstimate mc_normalizer(int d, const Concentration& kappa, const StiefelPoint& g,
                         std::size_t n_samples, Rng& rng);

struct MeanCoefficient {
  Matrix u;           // p x p, diagonal
  bool near_uniform;  // some kappa_i < 1e-4; the one-sided difference was used
};

// U with E(X) = F U, U_ii = 2 d log 0F1 / d (F^T F)_ii, by central differences
// in the squared singular values. Off-diagonal entries are zero at diagonal F^T F.
MeanCoefficient mean_coefficient_matrix(int d, const Concentration& kappa,
                                        const HypergeomConfig& cfg = {});

}  // namespace stiefeldp
