#include "stiefeldp/langevin.hpp"

#include <cmath>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

LangevinParams::LangevinParams(StiefelPoint location_, Concentration kappa_)
    : location(std::move(location_)), kappa(std::move(kappa_)) {
  if (kappa.size() != location.p())
    throw Error(ErrorCode::kInvalidShape, "LangevinParams: kappa length must equal p");
}

double log_etr(const Matrix& x, const LangevinParams& params) {
  const Matrix& g = params.location.matrix();
  double s = 0.0;
  for (int j = 0; j < params.p(); ++j) s += params.kappa[j] * g.col(j).dot(x.col(j));
  return s;
}

double log_density(const StiefelPoint& x, const LangevinParams& params, const HypergeomConfig& cfg) {
  if (x.d() != params.d() || x.p() != params.p())
    throw Error(ErrorCode::kInvalidShape, "log_density: shape mismatch");
  return log_etr(x.matrix(), params) - log_0f1(0.5 * params.d(), params.kappa, cfg);
}

namespace {

double log_vmf_normalizer(int m, double kappa) {
  if (kappa == 0.0) return 0.0;
  return log_0f1_uncached(0.5 * m, Concentration{kappa}).log_value;
}

// Wood (1994) for m >= 2; returns the cosine w = mean^T x.
double sample_vmf_cosine(int m, double kappa, Rng& rng) {
  const double dim = m - 1.0;
  const double b = dim / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dim * dim));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dim * std::log(1.0 - x0 * x0);
  for (;;) {
    const double z = rng.beta(0.5 * dim, 0.5 * dim);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + dim * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

LangevinDraw sample_haar_rejection(const LangevinParams& params, Rng& rng) {
  const double total = params.kappa.sum();
  if (total > kHaarRejectionLimit) {
    throw Error(ErrorCode::kConcentrationTooLarge,
                "sample: sum(kappa) = " + std::to_string(total) +
                    " exceeds the Haar rejection limit 200; use smaller kappa or the column sampler");
  }
  std::uint64_t proposals = 0;
  for (;;) {
    ++proposals;
    StiefelPoint x = sample_haar(params.d(), params.p(), rng);
    const double log_accept = log_etr(x.matrix(), params) - total;
    if (std::log(rng.uniform()) < log_accept) return {std::move(x), proposals};
  }
}

// Proposal: column j is von Mises-Fisher on the unit sphere of the orthogonal
// complement of the previous columns, with parameter kappa_j P g_j. Its density
// relative to the target is prod_j 0F1(m_j/2, kappa_j^2 r_j^2/4) / Z(kappa) with
// r_j = |P g_j| <= 1, so accepting with prod_j 0F1(., kappa_j^2 r_j^2/4) /
// 0F1(., kappa_j^2/4) gives exact draws.
LangevinDraw sample_column_rejection(const LangevinParams& params, Rng& rng) {
  const int d = params.d();
  const int p = params.p();
  const Matrix& g = params.location.matrix();
  std::vector<double> log_full(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) log_full[static_cast<std::size_t>(j)] = log_vmf_normalizer(d - j, params.kappa[j]);

  std::uint64_t proposals = 0;
  for (;;) {
    ++proposals;
    Matrix basis = Matrix::Identity(d, d);  // orthonormal basis of the current complement
    Matrix x(d, p);
    double log_accept = 0.0;
    for (int j = 0; j < p; ++j) {
      const int m = d - j;
      const Vector c = basis.transpose() * g.col(j);
      const double r = c.norm();
      const double k = params.kappa[j] * r;
      Vector y;
      if (k > 0.0) {
        y = sample_vmf(c / r, k, rng);
      } else {
        y = sample_vmf(Vector::Unit(m, 0), 0.0, rng);
      }
      x.col(j) = basis * y;
      if (j > 0) log_accept += log_vmf_normalizer(m, k) - log_full[static_cast<std::size_t>(j)];
      if (j + 1 < p) {
        // complement of y inside the current basis
        Eigen::HouseholderQR<Matrix> qr(y);
        const Matrix q = qr.householderQ();
        basis = basis * q.rightCols(m - 1);
      }
    }
    if (std::log(rng.uniform()) < log_accept) return {project(x), proposals};
  }
}

}  // namespace

Vector sample_vmf(const Vector& mean, double kappa, Rng& rng) {
  const int m = static_cast<int>(mean.size());
  if (m < 1) throw Error(ErrorCode::kInvalidShape, "sample_vmf: empty mean");
  if (kappa < 0.0) throw Error(ErrorCode::kInvalidArgument, "sample_vmf: kappa must be >= 0");
  if (m == 1) {
    // P(+) = e^k / (e^k + e^-k)
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * kappa * mean(0)));
    Vector out(1);
    out(0) = rng.uniform() < p_plus ? 1.0 : -1.0;
    return out;
  }
  const double w = sample_vmf_cosine(m, kappa, rng);
  Vector v(m);
  double norm = 0.0;
  do {
    for (int i = 0; i < m; ++i) v(i) = rng.normal();
    v -= mean.dot(v) * mean;
    norm = v.norm();
  } while (norm < 1e-12);
  v /= norm;
  Vector x = w * mean + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
  return x / x.norm();
}

LangevinDraw sample(const LangevinParams& params, Rng& rng, SamplerMethod method) {
  switch (method) {
    case SamplerMethod::kHaarRejection:
      return sample_haar_rejection(params, rng);
    case SamplerMethod::kColumnRejection:
      return sample_column_rejection(params, rng);
    case SamplerMethod::kAuto:
      break;
  }
  // Haar acceptance decays like exp(-sum kappa); beyond a few units the
  // column sampler is far cheaper.
  if (params.kappa.sum() <= 2.0) return sample_haar_rejection(params, rng);
  return sample_column_rejection(params, rng);
}

LangevinMean mean(const LangevinParams& params, const HypergeomConfig& cfg) {
  const MeanCoefficient mc = mean_coefficient_matrix(params.d(), params.kappa, cfg);
  const Matrix f = params.location.matrix() * params.kappa.values().asDiagonal();
  return {f * mc.u, mc.near_uniform};
}

double column_marginal_log_density(const Vector& v, const LangevinParams& params, int column,
                                   const HypergeomConfig& cfg) {
  return column_marginal_log_density(v, params, column, log_0f1(0.5 * params.d(), params.kappa, cfg),
                                     cfg);
}

double column_marginal_log_density(const Vector& v, const LangevinParams& params, int column,
                                   double log_normalizer, const HypergeomConfig& cfg) {
  const int d = params.d();
  const int p = params.p();
  if (column < 0 || column >= p) throw Error(ErrorCode::kInvalidArgument, "column index out of range");
  if (v.size() != d) throw Error(ErrorCode::kInvalidShape, "direction must have length d");
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > 1e-8) throw Error(ErrorCode::kInvalidArgument, "direction must be a unit vector");
  const Vector u = v / norm;
  const Matrix& g = params.location.matrix();
  double out = params.kappa[column] * g.col(column).dot(u) - log_normalizer;
  if (p > 1) {
    Matrix rest(d, p - 1);
    for (int k = 0, c = 0; k < p; ++k) {
      if (k == column) continue;
      rest.col(c++) = params.kappa[k] * g.col(k);
    }
    rest -= u * (u.transpose() * rest);
    Eigen::JacobiSVD<Matrix> svd(rest);
    out += log_0f1_uncached(0.5 * (d - 1), Concentration(svd.singularValues()), cfg).log_value;
  }
  return out;
}

}  // namespace stiefeldp
