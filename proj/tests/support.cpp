#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace testing {

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

bool ks_accepts(double stat, std::size_t n) { return stat * std::sqrt(static_cast<double>(n)) < 1.628; }

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

bool ks_two_sample_accepts(double stat, std::size_t n, std::size_t m) {
  const double en = std::sqrt(double(n) * double(m) / double(n + m));
  return stat * en < 1.628;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sj = 0.0, sa = 0.0, sb = 0.0;
  for (auto& [k, v] : joint) sj += c2(v);
  for (auto& [k, v] : ra) sa += c2(v);
  for (auto& [k, v] : rb) sb += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (sj - expected) / (max_index - expected);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double scalar_log_0f1(double a, double x) {
  // terms t_k = x^k / ((a)_k k!), accumulated relative to the running max
  double log_t = 0.0, log_max = 0.0;
  std::vector<double> logs{0.0};
  for (int k = 1; k < 20000; ++k) {
    log_t += std::log(x) - std::log(a + k - 1.0) - std::log(static_cast<double>(k));
    logs.push_back(log_t);
    log_max = std::max(log_max, log_t);
    if (log_t < log_max - 60.0 && k > x) break;
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - log_max);
  return log_max + std::log(s);
}

double log_sinhc(double k) {
  if (k < 1e-4) return k * k / 6.0;
  return k + std::log1p(-std::exp(-2.0 * k)) - std::log(2.0 * k);
}

double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

stiefeldp::Matrix random_orthogonal(int d, stiefeldp::Rng& rng) {
  return stiefeldp::sample_haar(d, d, rng).matrix();
}

stiefeldp::Matrix gram_schmidt(const stiefeldp::Matrix& m) {
  stiefeldp::Matrix q = m;
  for (int j = 0; j < q.cols(); ++j) {
    for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(m.col(j)) * q.col(k);
    q.col(j) /= q.col(j).norm();
  }
  return q;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  for (int l : labels) {
    auto it = seen.find(l);
    if (it == seen.end()) it = seen.emplace(l, static_cast<int>(seen.size())).first;
    out.push_back(it->second);
  }
  return out;
}

namespace {

void enumerate(std::size_t i, int k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (i == cur.size()) {
    out.push_back(cur);
    return;
  }
  for (int c = 0; c <= k; ++c) {
    cur[i] = c;
    enumerate(i + 1, std::max(k, c + 1), cur, out);
  }
}

}  // namespace

std::map<std::vector<int>, double> partition_posterior(const std::vector<stiefeldp::StiefelPoint>& data,
                                                       const std::vector<stiefeldp::LangevinParams>& atoms,
                                                       double alpha) {
  std::vector<std::vector<int>> parts;
  std::vector<int> cur(data.size(), 0);
  enumerate(0, 0, cur, parts);
  // plain (not log) arithmetic is fine at this size
  std::vector<std::vector<double>> lik(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (const auto& x : data) lik[a].push_back(std::exp(stiefeldp::log_density(x, atoms[a])));
  std::map<std::vector<int>, double> out;
  double total = 0.0;
  for (const auto& part : parts) {
    const int k = *std::max_element(part.begin(), part.end()) + 1;
    double w = std::pow(alpha, k);
    for (int c = 0; c < k; ++c) {
      int size = 0;
      for (int l : part) size += l == c;
      w *= std::tgamma(static_cast<double>(size));
      double marginal = 0.0;
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        double prod = 1.0;
        for (std::size_t i = 0; i < data.size(); ++i)
          if (part[i] == c) prod *= lik[a][i];
        marginal += prod / static_cast<double>(atoms.size());
      }
      w *= marginal;
    }
    out[part] = w;
    total += w;
  }
  for (auto& [k, v] : out) v /= total;
  return out;
}

}  // namespace testing
