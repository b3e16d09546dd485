#include "stiefeldp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0; }
};

void require_same_shape(const DensityHandle& f, const DensityHandle& g) {
  if (f.d != g.d || f.p != g.p) throw Error(ErrorCode::kInvalidShape, "densities live on different manifolds");
  if (!f.log_density || !g.log_density) throw Error(ErrorCode::kInvalidArgument, "density handle has no log density");
}

// Draw from the proposal (Haar when null) and return its log density.
StiefelPoint draw_proposal(const DensityHandle* q, int d, int p, Rng& rng, double& log_q) {
  if (!q) {
    log_q = 0.0;
    return sample_haar(d, p, rng);
  }
  StiefelPoint x = q->sampler(rng);
  log_q = q->log_density(x);
  return x;
}

void check_proposal(const DensityHandle* q, const DensityHandle& f) {
  if (!q) return;
  if (q->d != f.d || q->p != f.p) throw Error(ErrorCode::kInvalidShape, "proposal shape mismatch");
  if (!q->can_sample()) throw Error(ErrorCode::kInvalidArgument, "proposal density has no sampler");
}

}  // namespace

// ---- DensityHandle ----

DensityHandle DensityHandle::uniform(int d, int p) {
  if (p < 1 || d < p) throw Error(ErrorCode::kInvalidShape, "need 1 <= p <= d");
  DensityHandle h;
  h.d = d;
  h.p = p;
  h.log_density = [](const StiefelPoint&) { return 0.0; };
  h.sampler = [d, p](Rng& rng) { return sample_haar(d, p, rng); };
  return h;
}

DensityHandle DensityHandle::langevin(const LangevinParams& params, const HypergeomConfig& cfg) {
  DensityHandle h;
  h.d = params.d();
  h.p = params.p();
  const double log_z = log_0f1(0.5 * params.d(), params.kappa, cfg);
  h.log_density = [params, log_z](const StiefelPoint& x) { return log_etr(x.matrix(), params) - log_z; };
  h.sampler = [params](Rng& rng) { return sample(params, rng, SamplerMethod::kAuto).x; };
  h.modes.push_back(params.location);
  return h;
}

DensityHandle DensityHandle::mixture(std::vector<DensityHandle> parts, std::vector<double> weights) {
  if (parts.empty() || parts.size() != weights.size())
    throw Error(ErrorCode::kInvalidArgument, "mixture needs one weight per component");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kInvalidArgument, "mixture weights must be >= 0");
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mixture weights sum to zero");
  DensityHandle h;
  h.d = parts.front().d;
  h.p = parts.front().p;
  bool samplable = true;
  std::vector<double> log_w;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    require_same_shape(parts.front(), parts[k]);
    samplable = samplable && parts[k].can_sample();
    log_w.push_back(std::log(weights[k] / total));
    h.modes.insert(h.modes.end(), parts[k].modes.begin(), parts[k].modes.end());
  }
  auto shared = std::make_shared<const std::vector<DensityHandle>>(std::move(parts));
  h.log_density = [shared, log_w](const StiefelPoint& x) {
    std::vector<double> t(log_w.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = log_w[k] + (*shared)[k].log_density(x);
    return log_sum_exp(t);
  };
  if (samplable) {
    std::vector<double> cum;
    double acc = 0.0;
    for (double w : weights) cum.push_back(acc += w / total);
    h.sampler = [shared, cum](Rng& rng) {
      const double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < cum.size() && u >= cum[k]) ++k;
      return (*shared)[k].sampler(rng);
    };
  }
  return h;
}

DensityHandle DensityHandle::langevin_mixture(const std::vector<LangevinParams>& params, std::vector<double> weights,
                                              const HypergeomConfig& cfg) {
  std::vector<DensityHandle> parts;
  parts.reserve(params.size());
  for (const auto& pr : params) parts.push_back(langevin(pr, cfg));
  return mixture(std::move(parts), std::move(weights));
}

DensityHandle DensityHandle::predictive(const ChainOutput& chain, std::size_t max_states) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  if (max_states < 1) throw Error(ErrorCode::kInvalidArgument, "max_states must be >= 1");
  auto sub = std::make_shared<ChainOutput>();
  sub->seed = chain.seed;
  sub->config = chain.config;
  sub->prior = chain.prior;
  sub->n = chain.n;
  sub->d = chain.d;
  sub->p = chain.p;
  const std::size_t S = chain.states.size();
  const std::size_t m = std::min(S, max_states);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t idx =
        m == 1 ? S - 1 : static_cast<std::size_t>(std::llround(double(r) * double(S - 1) / double(m - 1)));
    sub->states.push_back(chain.states[idx]);
    sub->log_joint.push_back(chain.log_joint[idx]);
  }
  DensityHandle h;
  h.d = chain.d;
  h.p = chain.p;
  h.log_density = [sub](const StiefelPoint& x) { return log_predictive(x, *sub); };
  h.sampler = [sub](Rng& rng) {
    const auto& st = sub->states[std::min(sub->states.size() - 1,
                                          static_cast<std::size_t>(rng.uniform() * double(sub->states.size())))];
    const auto sizes = st.sizes();
    double u = rng.uniform() * (sub->n + st.alpha);
    for (int c = 0; c < st.num_clusters(); ++c) {
      u -= sizes[static_cast<std::size_t>(c)];
      if (u < 0.0) return sample(st.params(c), rng, SamplerMethod::kAuto).x;
    }
    const auto& atoms = sub->prior.atoms;
    if (atoms.empty()) return sample_haar(sub->d, sub->p, rng);
    const auto a = std::min(atoms.size() - 1, static_cast<std::size_t>(rng.uniform() * double(atoms.size())));
    return sample(atoms[a], rng, SamplerMethod::kAuto).x;
  };
  const MixtureState& best = map_state(*sub);
  h.modes = best.locations;
  return h;
}

// ---- divergences ----

McEstimateResult hellinger_mc(const DensityHandle& f, const DensityHandle& g, std::size_t n_samples, Rng& rng,
                              const DensityHandle* proposal) {
  require_same_shape(f, g);
  check_proposal(proposal, f);
  if (n_samples < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 samples");
  Welford acc;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double log_q = 0.0;
    const StiefelPoint x = draw_proposal(proposal, f.d, f.p, rng, log_q);
    acc.add(std::exp(0.5 * (f.log_density(x) + g.log_density(x)) - log_q));
  }
  McEstimateResult out;
  const double h2 = 1.0 - acc.mean;
  const double se = acc.se();
  if (h2 < 0.0) {
    out.clamped = true;
    out.estimate = 0.0;
  } else {
    out.estimate = std::sqrt(h2);
  }
  // delta method away from zero; near zero the sqrt of the affinity SE bounds the spread
  out.std_error = h2 > se && out.estimate > 0.0 ? se / (2.0 * out.estimate) : std::sqrt(se);
  return out;
}

McEstimateResult kl_mc(const DensityHandle& f0, const DensityHandle& f, std::size_t n_samples, Rng& rng,
                       const DensityHandle* proposal) {
  require_same_shape(f0, f);
  check_proposal(proposal, f0);
  if (n_samples < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 samples");
  Welford acc;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double log_q = 0.0;
    const StiefelPoint x = draw_proposal(proposal, f0.d, f0.p, rng, log_q);
    const double l0 = f0.log_density(x);
    acc.add(std::exp(l0 - log_q) * (l0 - f.log_density(x)));
  }
  return {acc.mean, acc.se(), false};
}

KernelApproxResult kernel_approx_error(const DensityHandle& f, const Concentration& kappa, std::size_t n_outer,
                                       std::size_t n_inner, Rng& rng, const HypergeomConfig& cfg) {
  if (!f.log_density) throw Error(ErrorCode::kInvalidArgument, "density handle has no log density");
  if (kappa.size() != f.p) throw Error(ErrorCode::kInvalidShape, "kappa length must equal p");
  if (n_outer < 1000 || n_inner < 1000) throw Error(ErrorCode::kInvalidArgument, "need n_outer, n_inner >= 1000");
  (void)cfg;
  std::vector<StiefelPoint> probes;
  probes.reserve(n_outer + f.modes.size());
  for (std::size_t i = 0; i < n_outer; ++i) probes.push_back(sample_haar(f.d, f.p, rng));
  probes.insert(probes.end(), f.modes.begin(), f.modes.end());

  KernelApproxResult out;
  out.probes = probes.size();
  for (const auto& x : probes) {
    const LangevinParams kernel(x, kappa);
    Welford acc;
    for (std::size_t j = 0; j < n_inner; ++j) acc.add(std::exp(f.log_density(sample(kernel, rng, SamplerMethod::kAuto).x)));
    const double err = std::abs(std::exp(f.log_density(x)) - acc.mean);
    if (err > out.error) out.error = err;
    out.max_inner_se = std::max(out.max_inner_se, acc.se());
  }
  return out;
}

// ---- Lipschitz ratios ----

double location_difference_ratio(const StiefelPoint& x, const StiefelPoint& g1, const StiefelPoint& g2,
                                  const Concentration& kappa, const HypergeomConfig& cfg) {
  const double dist = frobenius_distance(g1, g2);
  if (dist == 0.0) throw Error(ErrorCode::kInvalidArgument, "coincident locations");
  const double log_z = log_0f1(0.5 * x.d(), kappa, cfg);
  const double a = log_etr(x.matrix(), LangevinParams(g1, kappa)) - log_z;
  const double b = log_etr(x.matrix(), LangevinParams(g2, kappa)) - log_z;
  return std::abs(std::exp(a) - std::exp(b)) / dist;
}

double concentration_difference_ratio(const StiefelPoint& x, const StiefelPoint& g, const Concentration& k1,
                                      const Concentration& k2, const HypergeomConfig& cfg) {
  if (k1.size() != k2.size()) throw Error(ErrorCode::kInvalidShape, "kappa length mismatch");
  const double dist = (k1.values() - k2.values()).norm();
  if (dist == 0.0) throw Error(ErrorCode::kInvalidArgument, "coincident concentrations");
  const double a = log_etr(x.matrix(), LangevinParams(g, k1)) - log_0f1_uncached(0.5 * x.d(), k1, cfg).log_value;
  const double b = log_etr(x.matrix(), LangevinParams(g, k2)) - log_0f1_uncached(0.5 * x.d(), k2, cfg).log_value;
  return std::abs(std::exp(a) - std::exp(b)) / dist;
}

double lipschitz_ratio_location(int d, const Concentration& kappa, std::size_t trials, Rng& rng,
                                const HypergeomConfig& cfg) {
  if (trials < 1000) throw Error(ErrorCode::kInvalidArgument, "need trials >= 1000");
  const int p = kappa.size();
  const double log_z = log_0f1(0.5 * d, kappa, cfg);
  const double spread = 1.0 / std::sqrt(kappa.values().maxCoeff() + 1.0);
  double best = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    StiefelPoint x = sample_haar(d, p, rng);
    StiefelPoint g1 = t % 2 == 0 ? sample_haar(d, p, rng) : perturb(x, spread * rng.uniform(), rng);
    StiefelPoint g2 = t % 2 == 0 ? sample_haar(d, p, rng) : perturb(g1, 0.01 * spread, rng);
    const double dist = frobenius_distance(g1, g2);
    if (dist == 0.0) continue;
    const double a = log_etr(x.matrix(), LangevinParams(g1, kappa)) - log_z;
    const double b = log_etr(x.matrix(), LangevinParams(g2, kappa)) - log_z;
    const double r = std::abs(std::exp(a) - std::exp(b)) / dist;
    if (std::isfinite(r)) best = std::max(best, r);
  }
  return best;
}

double lipschitz_ratio_concentration(int d, int p, double k_bound, std::size_t trials, Rng& rng,
                                     const HypergeomConfig& cfg) {
  if (trials < 1000) throw Error(ErrorCode::kInvalidArgument, "need trials >= 1000");
  const double side = k_bound / std::sqrt(static_cast<double>(p)) - 1.0;
  if (!(side > 0.0)) throw Error(ErrorCode::kInvalidArgument, "k_bound must exceed phi(0) = sqrt(p)");
  auto draw_kappa = [&] {
    Vector k(p);
    for (int i = 0; i < p; ++i) k(i) = side * rng.uniform();
    return k;
  };
  double best = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const StiefelPoint g = sample_haar(d, p, rng);
    const Vector k1 = draw_kappa();
    Vector k2;
    if (t % 2 == 0) {
      k2 = draw_kappa();
    } else {
      k2 = k1;
      const int i = std::min(p - 1, static_cast<int>(rng.uniform() * p));
      k2(i) = std::clamp(k1(i) + 1e-3 * side * (rng.uniform() - 0.5), 0.0, side);
    }
    if ((k1 - k2).norm() == 0.0) continue;
    const StiefelPoint x = t % 4 < 2 ? sample_haar(d, p, rng) : perturb(g, 0.3 * rng.uniform(), rng);
    const double r = concentration_difference_ratio(x, g, Concentration(k1), Concentration(k2), cfg);
    if (std::isfinite(r)) best = std::max(best, r);
  }
  return best;
}

double phi(const Concentration& kappa) {
  return (kappa.values().array() + 1.0).matrix().norm();
}

std::vector<TailCheck> tail_condition_check(const KappaPrior& prior, int d, int p, double a, double beta,
                                            const std::vector<long>& n_grid, Rng& rng, std::size_t draws) {
  prior.validate();
  if (p < 1 || d < p) throw Error(ErrorCode::kInvalidShape, "need 1 <= p <= d");
  const double a_max = 1.0 / static_cast<double>((p + 2) * d * p);
  if (!(a > 0.0 && a < a_max))
    throw Error(ErrorCode::kInvalidArgument, "need 0 < a < 1/((p+2) d p) = " + std::to_string(a_max));
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  if (draws < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one draw");

  std::vector<TailCheck> out;
  for (long n : n_grid) {
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
    TailCheck t;
    t.n = n;
    t.threshold = std::pow(static_cast<double>(n), a);
    t.bound = std::exp(-static_cast<double>(n) * beta);
    out.push_back(t);
  }
  std::vector<std::size_t> hits(out.size(), 0);
  Vector k(p);
  for (std::size_t s = 0; s < draws; ++s) {
    for (int i = 0; i < p; ++i) k(i) = prior.draw(rng);
    const double ph = (k.array() + 1.0).matrix().norm();
    for (std::size_t j = 0; j < out.size(); ++j)
      if (ph > out[j].threshold) ++hits[j];
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].mass = static_cast<double>(hits[j]) / static_cast<double>(draws);
    out[j].pass = out[j].mass <= out[j].bound;
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(ErrorCode::kInvalidArgument, "x values are all equal");
  return sxy / sxx;
}

}  // namespace stiefeldp
