#include "stiefeldp/manifold.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

namespace {

void require_shape(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1 || m.cols() > m.rows()) {
    throw Error(ErrorCode::kInvalidShape,
                "frame must be d x p with 1 <= p <= d, got " + std::to_string(m.rows()) + " x " +
                    std::to_string(m.cols()));
  }
}

}  // namespace

double orthonormality_deviation(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  return (gram - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

bool validate(const Matrix& m, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "validate: tol must be positive");
  require_shape(m);
  if (!m.allFinite()) return false;
  return orthonormality_deviation(m) <= tol;
}

StiefelPoint::StiefelPoint(Matrix m) : m_(std::move(m)) {
  if (!validate(m_, kTolerance)) {
    throw Error(ErrorCode::kInvariantViolation,
                "matrix columns are not orthonormal (deviation " +
                    std::to_string(orthonormality_deviation(m_)) + ")");
  }
}

StiefelPoint StiefelPoint::identity(int d, int p) {
  Matrix m = Matrix::Identity(d, p);
  return StiefelPoint(std::move(m));
}

std::vector<double> StiefelPoint::row_major() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_.size()));
  for (Eigen::Index i = 0; i < m_.rows(); ++i)
    for (Eigen::Index j = 0; j < m_.cols(); ++j) out.push_back(m_(i, j));
  return out;
}

StiefelPoint StiefelPoint::from_row_major(int d, int p, const double* values) {
  Matrix m(d, p);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = values[i * p + j];
  return StiefelPoint(std::move(m));
}

StiefelPoint sample_haar(int d, int p, Rng& rng) {
  if (p < 1 || p > d) throw Error(ErrorCode::kInvalidShape, "sample_haar: need 1 <= p <= d");
  Matrix a(d, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < d; ++i) a(i, j) = rng.normal();
  // Gram-Schmidt with a second pass is a thin QR whose R has positive diagonal,
  // which is exactly the sign-corrected factor.
  for (int j = 0; j < p; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) a.col(j) -= a.col(k).dot(a.col(j)) * a.col(k);
    }
    const double norm = a.col(j).norm();
    a.col(j) /= norm;
  }
  return StiefelPoint(std::move(a), StiefelPoint::Trusted{});
}

double frobenius_distance(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error(ErrorCode::kInvalidShape, "frobenius_distance: shape mismatch");
  return (x - y).norm();
}

double frobenius_distance(const StiefelPoint& x, const StiefelPoint& y) {
  return frobenius_distance(x.matrix(), y.matrix());
}

StiefelPoint project(const Matrix& m) {
  require_shape(m);
  if (!m.allFinite()) throw Error(ErrorCode::kDegenerateInput, "project: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(0) <= 0.0 || s(s.size() - 1) <= 1e-12 * s(0)) {
    throw Error(ErrorCode::kDegenerateInput, "project: matrix is rank deficient");
  }
  Matrix q = svd.matrixU() * svd.matrixV().transpose();
  return StiefelPoint(std::move(q), StiefelPoint::Trusted{});
}

StiefelPoint perturb(const StiefelPoint& g, double step, Rng& rng) {
  if (step < 0.0) throw Error(ErrorCode::kInvalidArgument, "perturb: step must be >= 0");
  if (step == 0.0) return g;
  Matrix e(g.d(), g.p());
  for (int j = 0; j < g.p(); ++j)
    for (int i = 0; i < g.d(); ++i) e(i, j) = rng.normal();
  return project(g.matrix() + step * e);
}

StiefelPoint rotate(const StiefelPoint& g, double step, Rng& rng) {
  if (step < 0.0) throw Error(ErrorCode::kInvalidArgument, "rotate: step must be >= 0");
  if (step == 0.0) return g;
  const int d = g.d();
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      a(i, j) = rng.normal();
      a(j, i) = -a(i, j);
    }
  const Matrix r = (step * a).exp();
  // exp of a skew matrix is orthogonal up to rounding; re-project to stay within tolerance
  return project(r * g.matrix());
}

std::string to_csv_row(const StiefelPoint& x) {
  std::ostringstream os;
  os << x.d() << ',' << x.p();
  char buf[32];
  for (double v : x.row_major()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  }
  return os.str();
}

StiefelPoint from_csv_row(const std::string& row) {
  std::vector<double> values;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "from_csv_row: bad number '" + cell + "'");
    }
  }
  if (values.size() < 2) throw Error(ErrorCode::kParse, "from_csv_row: missing d,p");
  const int d = static_cast<int>(values[0]);
  const int p = static_cast<int>(values[1]);
  if (d < 1 || p < 1 || p > d) throw Error(ErrorCode::kInvalidShape, "from_csv_row: bad d,p");
  if (values.size() != static_cast<std::size_t>(2 + d * p))
    throw Error(ErrorCode::kParse, "from_csv_row: expected " + std::to_string(d * p) + " values");
  return StiefelPoint::from_row_major(d, p, values.data() + 2);
}

}  // namespace stiefeldp
