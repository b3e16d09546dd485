#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stiefeldp/rng.hpp"

namespace stiefeldp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Largest |M^T M - I_p| entry.
double orthonormality_deviation(const Matrix& m);

// True iff max|M^T M - I_p| <= tol. Throws kInvalidShape when p > d or the
// matrix is empty, kInvalidArgument when tol <= 0.
bool validate(const Matrix& m, double tol);

/// A d x p matrix with orthonormal columns, i.e. a point of V_{p,d}.
///
/// Construction checks X^T X = I_p to within kTolerance and throws
/// kInvalidShape / kInvariantViolation otherwise, so every instance in the
/// program is a valid frame.
class StiefelPoint {
 public:
  static constexpr double kTolerance = 1e-10;

  explicit StiefelPoint(Matrix m);

  // First p columns of I_d.
  static StiefelPoint identity(int d, int p);

  int d() const noexcept { return static_cast<int>(m_.rows()); }
  int p() const noexcept { return static_cast<int>(m_.cols()); }
  const Matrix& matrix() const noexcept { return m_; }
  auto col(int j) const { return m_.col(j); }
  double operator()(int i, int j) const { return m_(i, j); }

  // d*p values, row-major.
  std::vector<double> row_major() const;
  static StiefelPoint from_row_major(int d, int p, const double* values);

 private:
  struct Trusted {};
  StiefelPoint(Matrix m, Trusted) : m_(std::move(m)) {}
  friend StiefelPoint sample_haar(int d, int p, Rng& rng);
  friend StiefelPoint project(const Matrix& m);

  Matrix m_;
};

// Haar-distributed frame: Gaussian d x p matrix, thin QR, R with positive diagonal.
StiefelPoint sample_haar(int d, int p, Rng& rng);

// sqrt(tr((X - Y)(X - Y)^T)); defined for any equal-shape matrices.
double frobenius_distance(const Matrix& x, const Matrix& y);
double frobenius_distance(const StiefelPoint& x, const StiefelPoint& y);

// Polar factor U V^T of the thin SVD; the closest frame to m in Frobenius norm.
// Throws kDegenerateInput when m is (numerically) rank deficient.
StiefelPoint project(const Matrix& m);

// project(G + step * E), E standard Gaussian. step == 0 returns G unchanged.
StiefelPoint perturb(const StiefelPoint& g, double step, Rng& rng);

// exp(step * A) G with A a standard Gaussian skew-symmetric d x d matrix.
// Exactly symmetric as a proposal; used when p == d.
StiefelPoint rotate(const StiefelPoint& g, double step, Rng& rng);

// Serialization: "d,p,x11,x12,...,xdp" (row-major values).
std::string to_csv_row(const StiefelPoint& x);
StiefelPoint from_csv_row(const std::string& row);

}  // namespace stiefeldp
