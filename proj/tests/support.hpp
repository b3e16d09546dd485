#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "stiefeldp/langevin.hpp"
#include "stiefeldp/manifold.hpp"

namespace testing {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};
Moments moments(const std::vector<double>& v);

// Kolmogorov-Smirnov statistic against a CDF, and the 0.01-level decision.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
bool ks_accepts(double stat, std::size_t n);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
bool ks_two_sample_accepts(double stat, std::size_t n, std::size_t m);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

double median(std::vector<double> v);

// Scalar oracle: log 0F1(a; x) = log sum_k x^k / ((a)_k k!), summed directly.
double scalar_log_0f1(double a, double x);

// log(sinh(k)/k), stable for large k.
double log_sinhc(double k);

// Composite Simpson rule on [lo, hi] with n (even) panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n);

// Random orthogonal d x d matrix.
stiefeldp::Matrix random_orthogonal(int d, stiefeldp::Rng& rng);

// Classical Gram-Schmidt written out independently of the library.
stiefeldp::Matrix gram_schmidt(const stiefeldp::Matrix& m);

// Labels renumbered by first appearance, so equal partitions compare equal.
std::vector<int> canonical_labels(const std::vector<int>& labels);

// Exact DP-mixture posterior over partitions of a small data set when the base
// measure is uniform over `atoms`, by enumerating every set partition.
std::map<std::vector<int>, double> partition_posterior(const std::vector<stiefeldp::StiefelPoint>& data,
                                                       const std::vector<stiefeldp::LangevinParams>& atoms,
                                                       double alpha);

}  // namespace testing
