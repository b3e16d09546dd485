#include "stiefeldp/hypergeom.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <numeric>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

// ---------------------------------------------------------------------------
// Concentration

Concentration::Concentration(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw Error(ErrorCode::kInvalidShape, "concentration must be non-empty");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_(i)) || values_(i) < 0.0)
      throw Error(ErrorCode::kInvalidArgument, "concentration entries must be finite and >= 0");
  }
}

Concentration::Concentration(std::initializer_list<double> values)
    : Concentration(Vector::Map(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

Concentration Concentration::zeros(int p) { return Concentration(Vector::Zero(p)); }

namespace {

constexpr int kMaxParts = 4;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTailTolerance = 1e-12;

using Part = std::array<int, kMaxParts>;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

std::uint64_t pack(const Part& f) {
  std::uint64_t key = 0;
  for (int i = 0; i < kMaxParts; ++i) key |= static_cast<std::uint64_t>(f[i]) << (16 * i);
  return key;
}

Part unpack(std::uint64_t key) {
  Part f{};
  for (int i = 0; i < kMaxParts; ++i) f[i] = static_cast<int>((key >> (16 * i)) & 0xffff);
  return f;
}

int part_size(const Part& l) { return l[0] + l[1] + l[2] + l[3]; }

// Monomial coefficients of 0F1(a; x) in the power-sum-free form
//   0F1(a; x) = sum_e W_{sort(e)} x_1^{e_1} ... x_p^{e_p},
// stored expanded over distinct exponent permutations and ordered by |e|.
struct SeriesTable {
  double a = 0.0;
  int p = 0;
  int k_max = 0;
  std::vector<double> log_w;
  std::vector<std::array<std::uint16_t, kMaxParts>> exps;
  std::vector<std::size_t> order_begin;  // size k_max + 2
};

// Builds the monomial expansion of sum_lambda C_lambda(x) / ((a)_lambda |lambda|!)
// for alpha = 2. Each Jack polynomial J_lambda is expanded by peeling one
// variable at a time,
//   J_lambda(x_1..x_m) = sum_mu J_mu(x_1..x_{m-1}) x_m^{|lambda/mu|} beta_{lambda mu},
// over horizontal strips lambda/mu. Only exponent vectors with
// e_1 >= e_2 >= ... >= e_p are tracked; the rest follow by symmetry.
class TableBuilder {
 public:
  TableBuilder(double a, int p, int k_max) : a_(a), p_(p), k_max_(k_max) {
    log_int_.resize(static_cast<std::size_t>(4 * k_max + 16));
    log_int_[0] = kNegInf;
    for (std::size_t h = 1; h < log_int_.size(); ++h) log_int_[h] = std::log(static_cast<double>(h));
  }

  SeriesTable build() {
    std::map<std::vector<int>, double> w;  // sorted exponent vector -> log W
    if (p_ == 1) {
      for (int k = 0; k <= k_max_; ++k)
        w[{k}] = -std::lgamma(k + 1.0) - (std::lgamma(a_ + k) - std::lgamma(a_));
    } else {
      w = expand();
    }
    return assemble(w);
  }

 private:
  using Level = std::unordered_map<std::uint64_t, std::unordered_map<std::uint64_t, double>>;

  double log_h(int h) const { return log_int_[static_cast<std::size_t>(h)]; }

  static void conjugate(const Part& l, std::vector<int>& out) {
    out.assign(static_cast<std::size_t>(l[0]) + 1, 0);
    for (int i = 0; i < kMaxParts; ++i)
      for (int j = 1; j <= l[i]; ++j) ++out[static_cast<std::size_t>(j)];
  }

  static int conj_at(const std::vector<int>& c, int j) {
    return j < static_cast<int>(c.size()) ? c[static_cast<std::size_t>(j)] : 0;
  }

  // sum over boxes (i,j) of nu of log B^nu(i,j), where the upper hook is used
  // in columns with lam'_j == mu'_j and the lower hook elsewhere.
  double log_hook_sum(const Part& nu, const std::vector<int>& nu_c, const std::vector<int>& lam_c,
                      const std::vector<int>& mu_c) const {
    double s = 0.0;
    for (int i = 1; i <= kMaxParts && nu[i - 1] > 0; ++i) {
      const int row = nu[i - 1];
      for (int j = 1; j <= row; ++j) {
        const int nc = conj_at(nu_c, j);
        const bool same = conj_at(lam_c, j) == conj_at(mu_c, j);
        const int h = same ? nc - i + 2 * (row - j + 1) : nc - i + 1 + 2 * (row - j);
        s += log_h(h);
      }
    }
    return s;
  }

  double log_beta(const Part& lam, const Part& mu) {
    conjugate(lam, lam_c_);
    conjugate(mu, mu_c_);
    return log_hook_sum(lam, lam_c_, lam_c_, mu_c_) - log_hook_sum(mu, mu_c_, lam_c_, mu_c_);
  }

  // log of alpha^k / (j_lambda (a)_lambda): the coefficient taking J_lambda to
  // C_lambda / ((a)_lambda k!).
  double log_leading(const Part& lam) {
    conjugate(lam, lam_c_);
    const int k = part_size(lam);
    double s = k * std::log(2.0);
    for (int i = 1; i <= kMaxParts && lam[i - 1] > 0; ++i) {
      const int row = lam[i - 1];
      for (int j = 1; j <= row; ++j) {
        const int c = conj_at(lam_c_, j);
        s -= log_h(c - i + 2 * (row - j + 1)) + log_h(c - i + 1 + 2 * (row - j));
      }
      const double shift = a_ - 0.5 * (i - 1);
      s -= std::lgamma(shift + row) - std::lgamma(shift);
    }
    return s;
  }

  void partitions(int parts, int remaining, int max_part, Part& cur, int idx,
                  std::vector<Part>& out) const {
    if (idx == parts || remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int v = std::min(max_part, remaining); v >= 1; --v) {
      cur[static_cast<std::size_t>(idx)] = v;
      partitions(parts, remaining - v, v, cur, idx + 1, out);
      cur[static_cast<std::size_t>(idx)] = 0;
    }
  }

  // Partitions mu interlacing lam (lam_{i+1} <= mu_i <= lam_i) with at most
  // `len` parts.
  static void interlacing(const Part& lam, int len, Part& mu, int i, std::vector<Part>& out) {
    if (i == len) {
      out.push_back(mu);
      return;
    }
    const int lo = i + 1 < kMaxParts ? lam[static_cast<std::size_t>(i) + 1] : 0;
    for (int v = lo; v <= lam[static_cast<std::size_t>(i)]; ++v) {
      mu[static_cast<std::size_t>(i)] = v;
      interlacing(lam, len, mu, i + 1, out);
    }
    mu[static_cast<std::size_t>(i)] = 0;
  }

  std::map<std::vector<int>, double> expand() {
    // Level m holds partitions with <= m parts, keyed, each mapping a suffix
    // (e_{m+1}, ..., e_p) to an accumulated log weight.
    Level level;
    {
      std::vector<Part> all;
      Part cur{};
      for (int k = 0; k <= k_max_; ++k) partitions(p_, k, k, cur, 0, all);
      for (const Part& lam : all) level[pack(lam)][0] = log_leading(lam);
    }
    std::vector<Part> mus;
    for (int m = p_; m >= 1; --m) {
      Level next;
      const int suffix_len = p_ - m;
      for (const auto& [lam_key, suffixes] : level) {
        const Part lam = unpack(lam_key);
        const int lam_size = part_size(lam);
        mus.clear();
        Part mu{};
        interlacing(lam, m - 1, mu, 0, mus);
        for (const Part& cand : mus) {
          const int mu_size = part_size(cand);
          const int e_m = lam_size - mu_size;
          // remaining exponents e_1..e_{m-1} are each >= e_m and sum to |mu|
          if (m >= 2 && static_cast<long>(e_m) * (m - 1) > mu_size) continue;
          if (m == 1 && mu_size != 0) continue;
          const double lb = log_beta(lam, cand);
          auto& dest = next[pack(cand)];
          for (const auto& [suffix_key, value] : suffixes) {
            const Part suffix = unpack(suffix_key);
            if (suffix_len > 0 && e_m < suffix[0]) continue;
            Part ns{};
            ns[0] = e_m;
            for (int t = 0; t < suffix_len; ++t) ns[static_cast<std::size_t>(t) + 1] = suffix[static_cast<std::size_t>(t)];
            auto [it, inserted] = dest.try_emplace(pack(ns), kNegInf);
            it->second = log_add(it->second, value + lb);
          }
        }
      }
      level = std::move(next);
    }
    std::map<std::vector<int>, double> w;
    for (const auto& [suffix_key, value] : level[pack(Part{})]) {
      const Part e = unpack(suffix_key);
      // suffix is stored as (e_1, ..., e_p) with e_1 the last peeled
      std::vector<int> sorted(e.begin(), e.begin() + p_);
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      w[sorted] = value;
    }
    return w;
  }

  SeriesTable assemble(const std::map<std::vector<int>, double>& w) const {
    struct Term {
      int order;
      double log_w;
      std::array<std::uint16_t, kMaxParts> e;
    };
    std::vector<Term> terms;
    for (const auto& [nu, lw] : w) {
      std::vector<int> perm = nu;
      std::sort(perm.begin(), perm.end());
      const int order = std::accumulate(perm.begin(), perm.end(), 0);
      do {
        Term t{order, lw, {}};
        for (int i = 0; i < p_; ++i) t.e[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(perm[static_cast<std::size_t>(i)]);
        terms.push_back(t);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term& x, const Term& y) { return x.order < y.order; });
    SeriesTable table;
    table.a = a_;
    table.p = p_;
    table.k_max = k_max_;
    table.order_begin.assign(static_cast<std::size_t>(k_max_) + 2, terms.size());
    for (std::size_t idx = terms.size(); idx-- > 0;)
      table.order_begin[static_cast<std::size_t>(terms[idx].order)] = idx;
    for (int k = k_max_; k >= 0; --k)
      table.order_begin[static_cast<std::size_t>(k)] =
          std::min(table.order_begin[static_cast<std::size_t>(k)], table.order_begin[static_cast<std::size_t>(k) + 1]);
    table.log_w.reserve(terms.size());
    table.exps.reserve(terms.size());
    for (const Term& t : terms) {
      table.log_w.push_back(t.log_w);
      table.exps.push_back(t.e);
    }
    return table;
  }

  double a_;
  int p_;
  int k_max_;
  std::vector<double> log_int_;
  std::vector<int> lam_c_;
  std::vector<int> mu_c_;
};

// ---------------------------------------------------------------------------
// Table and value caches

class TableCache {
 public:
  std::shared_ptr<const SeriesTable> get(double a, int p, int order) {
    const Key key{a, p};
    {
      std::shared_lock lock(mutex_);
      auto it = tables_.find(key);
      if (it != tables_.end() && it->second->k_max >= order) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end() && it->second->k_max >= order) return it->second;
    int k_max = order;
    if (it != tables_.end()) k_max = std::max(order, std::min(2 * it->second->k_max, max_truncation_order(p)));
    auto table = std::make_shared<const SeriesTable>(TableBuilder(a, p, k_max).build());
    tables_[key] = table;
    return table;
  }

 private:
  using Key = std::pair<double, int>;
  std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const SeriesTable>> tables_;
};

TableCache& table_cache() {
  static TableCache cache;
  return cache;
}

struct ValueKey {
  std::vector<std::uint64_t> words;
  bool operator==(const ValueKey& o) const { return words == o.words; }
};

struct ValueKeyHash {
  std::size_t operator()(const ValueKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t w : k.words) {
      h ^= w;
      h *= 1099511628211ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

class ValueCache {
 public:
  static constexpr std::size_t kCapacity = 1u << 18;

  bool find(const ValueKey& key, SeriesValue& out) {
    std::shared_lock lock(mutex_);
    auto it = values_.find(key);
    if (it == values_.end()) return false;
    out = it->second;
    return true;
  }

  void insert(const ValueKey& key, SeriesValue value) {
    std::unique_lock lock(mutex_);
    if (values_.size() >= kCapacity) values_.clear();
    values_.emplace(key, value);
  }

  void clear() {
    std::unique_lock lock(mutex_);
    values_.clear();
  }

  std::size_t size() {
    std::shared_lock lock(mutex_);
    return values_.size();
  }

 private:
  std::shared_mutex mutex_;
  std::unordered_map<ValueKey, SeriesValue, ValueKeyHash> values_;
};

ValueCache& value_cache() {
  static ValueCache cache;
  return cache;
}

std::uint64_t bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

struct Evaluation {
  double log_value;
  double tail_fraction;
};

Evaluation evaluate(const SeriesTable& table, const std::array<double, kMaxParts>& log_x, int order) {
  thread_local std::vector<double> scratch;
  const std::size_t end = table.order_begin[static_cast<std::size_t>(order) + 1];
  const std::size_t last = table.order_begin[static_cast<std::size_t>(order)];
  scratch.resize(end);
  double max_term = kNegInf;
  const int p = table.p;
  for (std::size_t t = 0; t < end; ++t) {
    double v = table.log_w[t];
    const auto& e = table.exps[t];
    for (int i = 0; i < p; ++i) {
      if (e[static_cast<std::size_t>(i)] == 0) continue;
      v += e[static_cast<std::size_t>(i)] * log_x[static_cast<std::size_t>(i)];
    }
    if (std::isnan(v)) v = kNegInf;  // 0 * -inf never happens, -inf + finite stays -inf
    scratch[t] = v;
    max_term = std::max(max_term, v);
  }
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t t = 0; t < end; ++t) {
    const double rel = scratch[t] - max_term;
    if (rel < -40.0) continue;  // below 4e-18 of the largest term
    const double x = std::exp(rel);
    total += x;
    if (t >= last) tail += x;
  }
  return {max_term + std::log(total), tail / total};
}

int initial_order(const HypergeomConfig& cfg, const Concentration& kappa, int cap) {
  const double s = 0.5 * kappa.sum();
  const double guess = s + 6.0 * std::sqrt(s + 1.0) + 10.0;
  int k = static_cast<int>(std::ceil(guess / 10.0)) * 10;
  k = std::max(k, std::max(cfg.truncation_order, 1));
  return std::min(k, cap);
}

void check_arguments(double half_d, const Concentration& kappa) {
  const int p = kappa.size();
  if (p > kMaxParts)
    throw Error(ErrorCode::kInvalidArgument, "log_0f1: series evaluator supports p <= 4");
  if (!(half_d >= 0.5 * p - 1e-12))
    throw Error(ErrorCode::kInvalidArgument, "log_0f1: need half_d >= p/2");
}

}  // namespace

int max_truncation_order(int p) {
  switch (p) {
    case 1: return 4000;
    case 2: return 400;
    case 3: return 120;
    default: return 48;
  }
}

SeriesValue log_0f1_uncached(double half_d, const Concentration& kappa, const HypergeomConfig& cfg) {
  check_arguments(half_d, kappa);
  const int p = kappa.size();
  std::array<double, kMaxParts> log_x{};
  bool all_zero = true;
  for (int i = 0; i < p; ++i) {
    const double k = kappa[i];
    all_zero = all_zero && k == 0.0;
    log_x[static_cast<std::size_t>(i)] = k == 0.0 ? kNegInf : 2.0 * std::log(k) - std::log(4.0);
  }
  if (all_zero) return {0.0, std::max(cfg.truncation_order, 1)};
  const int cap = max_truncation_order(p);
  int order = initial_order(cfg, kappa, cap);
  for (;;) {
    auto table = table_cache().get(half_d, p, order);
    const Evaluation ev = evaluate(*table, log_x, order);
    if (ev.tail_fraction <= kTailTolerance) return {ev.log_value, order};
    if (order >= cap) {
      throw TruncationError(order, "log_0f1: series not converged at order " + std::to_string(order) +
                                       " (last-order mass " + std::to_string(ev.tail_fraction) + ")");
    }
    order = std::min(2 * order, cap);
  }
}

SeriesValue log_0f1_detailed(double half_d, const Concentration& kappa, const HypergeomConfig& cfg) {
  ValueKey key;
  key.words.reserve(static_cast<std::size_t>(kappa.size()) + 2);
  key.words.push_back(bits(half_d));
  key.words.push_back(static_cast<std::uint64_t>(cfg.truncation_order));
  for (int i = 0; i < kappa.size(); ++i) key.words.push_back(bits(kappa[i]));
  SeriesValue cached{};
  if (value_cache().find(key, cached)) return cached;
  const SeriesValue v = log_0f1_uncached(half_d, kappa, cfg);
  value_cache().insert(key, v);
  return v;
}

double log_0f1(double half_d, const Concentration& kappa, const HypergeomConfig& cfg) {
  return log_0f1_detailed(half_d, kappa, cfg).log_value;
}

void clear_hypergeom_cache() { value_cache().clear(); }

std::size_t hypergeom_cache_size() { return value_cache().size(); }

McEstimate mc_normalizer(int d, const Concentration& kappa, const StiefelPoint& g,
                         std::size_t n_samples, Rng& rng) {
  const int p = kappa.size();
  if (g.d() != d || g.p() != p) throw Error(ErrorCode::kInvalidShape, "mc_normalizer: G shape mismatch");
  if (n_samples < 1000) throw Error(ErrorCode::kInvalidArgument, "mc_normalizer: need >= 1000 samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= n_samples; ++n) {
    const StiefelPoint x = sample_haar(d, p, rng);
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += kappa[j] * g.col(j).dot(x.col(j));
    const double v = std::exp(s);
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

MeanCoefficient mean_coefficient_matrix(int d, const Concentration& kappa, const HypergeomConfig& cfg) {
  const int p = kappa.size();
  const double half_d = 0.5 * d;
  MeanCoefficient out{Matrix::Zero(p, p), false};

  auto eval_at = [&](int i, double s, int order) {
    Vector k = kappa.values();
    k(i) = std::sqrt(std::max(s, 0.0));
    HypergeomConfig c = cfg;
    c.truncation_order = order;
    return log_0f1_detailed(half_d, Concentration(k), c);
  };

  for (int i = 0; i < p; ++i) {
    const double s = kappa[i] * kappa[i];
    const double h = std::max(1e-5, 1e-5 * s);
    const bool central = s - h >= 0.0;
    if (kappa[i] < 1e-4) out.near_uniform = true;
    const double s1 = central ? s - h : s + h;
    const double s2 = central ? s + h : s + 2.0 * h;
    // evaluate the stencil at one common truncation order
    int order = std::max(cfg.truncation_order, 1);
    SeriesValue f0{}, f1{}, f2{};
    for (int pass = 0; pass < 3; ++pass) {
      f0 = eval_at(i, s, order);
      f1 = eval_at(i, s1, order);
      f2 = eval_at(i, s2, order);
      const int needed = std::max({f0.order, f1.order, f2.order});
      if (f0.order == needed && f1.order == needed && f2.order == needed) break;
      order = needed;
    }
    const double deriv = central ? (f2.log_value - f1.log_value) / (2.0 * h)
                                 : (-3.0 * f0.log_value + 4.0 * f1.log_value - f2.log_value) / (2.0 * h);
    out.u(i, i) = 2.0 * deriv;
  }
  return out;
}

}  // namespace stiefeldp
