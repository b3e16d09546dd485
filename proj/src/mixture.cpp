#include "stiefeldp/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Cumulative-sum inversion with a single uniform.
std::size_t draw_categorical(const std::vector<double>& logw, Rng& rng) {
  double m = kNegInf;
  for (double x : logw) m = std::max(m, x);
  if (!std::isfinite(m)) throw Error(ErrorCode::kInvariantViolation, "all categorical weights vanish");
  double total = 0.0;
  for (double x : logw) total += std::exp(x - m);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    const double w = std::exp(logw[k] - m);
    if (w <= 0.0) continue;
    acc += w;
    last = k;
    if (u < acc) return k;
  }
  return last;
}

double kernel_log_lik(const StiefelPoint& x, const StiefelPoint& g, const Concentration& kappa,
                      double log_z) {
  double s = 0.0;
  for (int j = 0; j < g.p(); ++j) s += kappa[j] * g.col(j).dot(x.col(j));
  return s - log_z;
}

// sum_i kappa_j g_j^T S_j - n log Z, where S = sum of the cluster's observations.
double cluster_log_lik(const Matrix& suff, std::size_t count, const Matrix& g,
                       const Concentration& kappa, double log_z) {
  double s = 0.0;
  for (int j = 0; j < static_cast<int>(g.cols()); ++j) s += kappa[j] * g.col(j).dot(suff.col(j));
  return s - static_cast<double>(count) * log_z;
}

double kappa_prior_log(const KappaPrior& prior, const Concentration& k) {
  double s = 0.0;
  for (int i = 0; i < k.size(); ++i) s += prior.log_density(k[i]);
  return s;
}

struct Candidate {
  StiefelPoint location;
  Concentration kappa;
  double log_z;
};

Candidate draw_base(int d, int p, const PriorSpec& prior, const MixtureState& state,
                    const std::vector<double>& atom_log_z, Rng& rng, const HypergeomConfig& cfg) {
  if (!prior.atoms.empty()) {
    const auto a = static_cast<std::size_t>(rng.uniform() * static_cast<double>(prior.atoms.size()));
    const std::size_t i = std::min(a, prior.atoms.size() - 1);
    return {prior.atoms[i].location, prior.atoms[i].kappa, atom_log_z[i]};
  }
  StiefelPoint g = sample_haar(d, p, rng);
  if (prior.variant == Variant::kLocationOnly) {
    return {std::move(g), *state.shared_kappa, state.log_normalizers.empty() ? 0.0 : state.log_normalizers[0]};
  }
  Vector k(p);
  for (int i = 0; i < p; ++i) k(i) = prior.kappa_prior.draw(rng);
  Concentration kappa(k);
  const double lz = log_0f1_uncached(0.5 * d, kappa, cfg).log_value;
  return {std::move(g), std::move(kappa), lz};
}

std::vector<double> atom_normalizers(const PriorSpec& prior, const HypergeomConfig& cfg) {
  std::vector<double> out;
  out.reserve(prior.atoms.size());
  for (const auto& a : prior.atoms) out.push_back(log_0f1(0.5 * a.d(), a.kappa, cfg));
  return out;
}

void check_data(const Data& data) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "data must contain at least one frame");
  for (const auto& x : data)
    if (x.d() != data.front().d() || x.p() != data.front().p())
      throw Error(ErrorCode::kInvalidShape, "all frames must share (d, p)");
}

double log_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

// ---- KappaPrior ----

KappaPrior KappaPrior::truncated_exponential(double rate, double lower) {
  KappaPrior k;
  k.kind = Kind::kTruncatedExponential;
  k.rate = rate;
  k.lower = lower;
  k.validate();
  return k;
}

KappaPrior KappaPrior::weibull(double shape, double b) {
  KappaPrior k;
  k.kind = Kind::kWeibull;
  k.shape = shape;
  k.rate = b;
  k.lower = 0.0;
  k.validate();
  return k;
}

KappaPrior KappaPrior::gamma(double shape, double rate) {
  KappaPrior k;
  k.kind = Kind::kGamma;
  k.shape = shape;
  k.rate = rate;
  k.lower = 0.0;
  k.validate();
  return k;
}

KappaPrior KappaPrior::point_mass(double value) {
  KappaPrior k;
  k.kind = Kind::kPointMass;
  k.point = value;
  k.lower = 0.0;
  k.validate();
  return k;
}

void KappaPrior::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::kInvalidArgument, what); };
  switch (kind) {
    case Kind::kTruncatedExponential:
      if (!(rate > 0.0) || !std::isfinite(rate)) bad("exponential rate must be positive");
      if (!(lower >= 0.0) || !std::isfinite(lower)) bad("exponential lower bound must be >= 0");
      break;
    case Kind::kWeibull:
    case Kind::kGamma:
      if (!(shape > 0.0) || !std::isfinite(shape)) bad("kappa prior shape must be positive");
      if (!(rate > 0.0) || !std::isfinite(rate)) bad("kappa prior rate must be positive");
      break;
    case Kind::kPointMass:
      if (!(point >= 0.0) || !std::isfinite(point)) bad("point mass must be a finite value >= 0");
      break;
  }
}

bool KappaPrior::in_support(double k) const {
  if (!std::isfinite(k)) return false;
  switch (kind) {
    case Kind::kTruncatedExponential: return k >= lower;
    case Kind::kWeibull:
    case Kind::kGamma: return k > 0.0;
    case Kind::kPointMass: return k == point;
  }
  return false;
}

double KappaPrior::log_density(double k) const {
  if (!in_support(k)) return kNegInf;
  switch (kind) {
    case Kind::kTruncatedExponential: return std::log(rate) - rate * (k - lower);
    case Kind::kWeibull:
      return std::log(shape) + std::log(rate) + (shape - 1.0) * std::log(k) - rate * std::pow(k, shape);
    case Kind::kGamma: return log_gamma_density(k, shape, rate);
    case Kind::kPointMass: return 0.0;
  }
  return kNegInf;
}

double KappaPrior::draw(Rng& rng) const {
  switch (kind) {
    case Kind::kTruncatedExponential: return lower - std::log1p(-rng.uniform()) / rate;
    case Kind::kWeibull: {
      // P(K > k) = exp(-b k^shape)
      const double e = -std::log1p(-rng.uniform());
      return std::pow(e / rate, 1.0 / shape);
    }
    case Kind::kGamma: return rng.gamma(shape) / rate;
    case Kind::kPointMass: return point;
  }
  return point;
}

void PriorSpec::validate(int d, int p) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::kInvalidArgument, "alpha must be > 0");
  kappa_prior.validate();
  if (alpha_prior && (!(alpha_prior->shape > 0.0) || !(alpha_prior->rate > 0.0)))
    throw Error(ErrorCode::kInvalidArgument, "alpha hyperprior needs positive shape and rate");
  if (!atoms.empty()) {
    if (variant != Variant::kLocationScale)
      throw Error(ErrorCode::kInvalidArgument, "discrete base measure requires the location-scale variant");
    for (const auto& a : atoms)
      if (a.d() != d || a.p() != p) throw Error(ErrorCode::kInvalidShape, "atom shape does not match data");
  }
}

// ---- MixtureState ----

const Concentration& MixtureState::kappa(int c) const {
  if (shared_kappa) return *shared_kappa;
  return kappas.at(static_cast<std::size_t>(c));
}

LangevinParams MixtureState::params(int c) const {
  return LangevinParams(locations.at(static_cast<std::size_t>(c)), kappa(c));
}

std::vector<int> MixtureState::sizes() const {
  std::vector<int> out(locations.size(), 0);
  for (int a : assignments) {
    if (a < 0 || a >= num_clusters()) throw Error(ErrorCode::kInvariantViolation, "label out of range");
    ++out[static_cast<std::size_t>(a)];
  }
  return out;
}

void MixtureState::check_invariants(std::size_t n) const {
  auto fail = [](const char* what) { throw Error(ErrorCode::kInvariantViolation, what); };
  if (assignments.size() != n) fail("assignment vector has the wrong length");
  if (log_normalizers.size() != locations.size()) fail("normalizer table out of sync");
  if (shared_kappa) {
    if (!kappas.empty()) fail("location-only state carries per-cluster kappa");
  } else if (kappas.size() != locations.size()) {
    fail("kappa table out of sync");
  }
  const auto s = sizes();
  long total = 0;
  for (int c : s) {
    if (c == 0) fail("empty cluster");
    total += c;
  }
  if (static_cast<std::size_t>(total) != n) fail("cluster sizes do not sum to n");
  if (!(alpha > 0.0)) fail("alpha must be positive");
}

// ---- sampler ----

MixtureState init_state(const Data& data, const PriorSpec& prior, Rng& rng, const HypergeomConfig& cfg) {
  check_data(data);
  const int d = data.front().d(), p = data.front().p();
  prior.validate(d, p);
  MixtureState s;
  s.alpha = prior.alpha;
  s.assignments.assign(data.size(), 0);
  if (prior.variant == Variant::kLocationOnly) {
    Vector k(p);
    for (int i = 0; i < p; ++i) k(i) = prior.kappa_prior.draw(rng);
    s.shared_kappa = Concentration(k);
  }
  const auto atom_z = atom_normalizers(prior, cfg);
  Candidate c = draw_base(d, p, prior, s, atom_z, rng, cfg);
  if (prior.variant == Variant::kLocationOnly) c.log_z = log_0f1(0.5 * d, *s.shared_kappa, cfg);
  s.locations.push_back(std::move(c.location));
  if (!s.shared_kappa) s.kappas.push_back(std::move(c.kappa));
  s.log_normalizers.push_back(c.log_z);
  s.check_invariants(data.size());
  return s;
}

void reassign_sweep(MixtureState& state, const Data& data, const PriorSpec& prior, int m_aux, Rng& rng,
                    const HypergeomConfig& cfg) {
  if (m_aux < 1) throw Error(ErrorCode::kInvalidArgument, "m_aux must be >= 1");
  check_data(data);
  state.check_invariants(data.size());
  const int d = data.front().d(), p = data.front().p();
  const bool shared = prior.variant == Variant::kLocationOnly;
  const auto atom_z = atom_normalizers(prior, cfg);
  const double log_alpha_aux = std::log(state.alpha) - std::log(static_cast<double>(m_aux));

  std::vector<int> sizes = state.sizes();
  std::vector<Candidate> aux;
  std::vector<double> logw;
  std::vector<int> slots;

  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = state.assignments[i];
    --sizes[static_cast<std::size_t>(c)];
    aux.clear();
    if (sizes[static_cast<std::size_t>(c)] == 0) {
      // the singleton's own parameters stand in for the first auxiliary draw
      aux.push_back({state.locations[c], state.kappa(c), state.log_normalizers[c]});
    }
    while (static_cast<int>(aux.size()) < m_aux) aux.push_back(draw_base(d, p, prior, state, atom_z, rng, cfg));

    logw.clear();
    slots.clear();
    for (int k = 0; k < state.num_clusters(); ++k) {
      if (sizes[static_cast<std::size_t>(k)] == 0) continue;
      slots.push_back(k);
      logw.push_back(std::log(static_cast<double>(sizes[static_cast<std::size_t>(k)])) +
                     kernel_log_lik(data[i], state.locations[k], state.kappa(k), state.log_normalizers[k]));
    }
    for (const auto& a : aux) logw.push_back(log_alpha_aux + kernel_log_lik(data[i], a.location, a.kappa, a.log_z));

    const std::size_t pick = draw_categorical(logw, rng);
    if (pick < slots.size()) {
      state.assignments[i] = slots[pick];
      ++sizes[static_cast<std::size_t>(slots[pick])];
      continue;
    }
    Candidate& chosen = aux[pick - slots.size()];
    int slot = -1;
    for (int k = 0; k < state.num_clusters(); ++k)
      if (sizes[static_cast<std::size_t>(k)] == 0) {
        slot = k;
        break;
      }
    if (slot < 0) {
      slot = state.num_clusters();
      state.locations.push_back(chosen.location);
      if (!shared) state.kappas.push_back(chosen.kappa);
      state.log_normalizers.push_back(chosen.log_z);
      sizes.push_back(0);
    } else {
      state.locations[slot] = chosen.location;
      if (!shared) state.kappas[slot] = chosen.kappa;
      state.log_normalizers[slot] = chosen.log_z;
    }
    state.assignments[i] = slot;
    sizes[static_cast<std::size_t>(slot)] = 1;
  }

  // compact: surviving slots keep their relative order
  std::vector<int> remap(sizes.size(), -1);
  MixtureState out;
  out.alpha = state.alpha;
  out.sweep_index = state.sweep_index;
  out.shared_kappa = state.shared_kappa;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) continue;
    remap[k] = static_cast<int>(out.locations.size());
    out.locations.push_back(state.locations[k]);
    if (!shared) out.kappas.push_back(state.kappas[k]);
    out.log_normalizers.push_back(state.log_normalizers[k]);
  }
  out.assignments.reserve(data.size());
  for (int a : state.assignments) out.assignments.push_back(remap[static_cast<std::size_t>(a)]);
  out.check_invariants(data.size());
  state = std::move(out);
}

void update_cluster_params(MixtureState& state, const Data& data, const PriorSpec& prior, const StepSizes& steps,
                           Rng& rng, AcceptanceCounters& counters, const HypergeomConfig& cfg) {
  check_data(data);
  state.check_invariants(data.size());
  const int d = data.front().d(), p = data.front().p();
  const int K = state.num_clusters();
  const bool shared = prior.variant == Variant::kLocationOnly;

  std::vector<Matrix> suff(static_cast<std::size_t>(K), Matrix::Zero(d, p));
  std::vector<std::size_t> count(static_cast<std::size_t>(K), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(state.assignments[i]);
    suff[c] += data[i].matrix();
    ++count[c];
  }

  if (!prior.atoms.empty()) {
    // discrete base measure: exact conditional draw over the atoms
    const auto atom_z = atom_normalizers(prior, cfg);
    std::vector<double> logw(prior.atoms.size());
    for (int c = 0; c < K; ++c) {
      for (std::size_t a = 0; a < prior.atoms.size(); ++a)
        logw[a] = cluster_log_lik(suff[c], count[c], prior.atoms[a].location.matrix(), prior.atoms[a].kappa, atom_z[a]);
      const std::size_t a = draw_categorical(logw, rng);
      state.locations[c] = prior.atoms[a].location;
      state.kappas[c] = prior.atoms[a].kappa;
      state.log_normalizers[c] = atom_z[a];
    }
    return;
  }

  // locations
  for (int c = 0; c < K; ++c) {
    ++counters.g_proposed;
    if (steps.g == 0.0) {
      ++counters.g_accepted;
      continue;
    }
    const Concentration& kappa = state.kappa(c);
    StiefelPoint prop = (p == d) ? rotate(state.locations[c], steps.g, rng) : perturb(state.locations[c], steps.g, rng);
    double delta = 0.0;
    for (int j = 0; j < p; ++j) delta += kappa[j] * (prop.col(j) - state.locations[c].col(j)).dot(suff[c].col(j));
    if (std::log(rng.uniform()) < delta) {
      state.locations[c] = std::move(prop);
      ++counters.g_accepted;
    }
  }

  if (prior.kappa_prior.kind == KappaPrior::Kind::kPointMass) return;

  // concentrations, one coordinate at a time on the log scale
  auto propose = [&](const Concentration& cur, int j, Concentration& out_k, double& log_jac) {
    Vector v = cur.values();
    const double z = steps.kappa * rng.normal();
    v(j) = cur[j] * std::exp(z);
    log_jac = z;
    out_k = Concentration(v);
  };

  if (shared) {
    Concentration cur = *state.shared_kappa;
    double cur_z = state.log_normalizers.front();
    for (int j = 0; j < p; ++j) {
      ++counters.kappa_proposed;
      if (steps.kappa == 0.0) {
        ++counters.kappa_accepted;
        continue;
      }
      Concentration prop = cur;
      double log_jac = 0.0;
      propose(cur, j, prop, log_jac);
      if (!prior.kappa_prior.in_support(prop[j])) continue;
      const double prop_z = log_0f1(0.5 * d, prop, cfg);
      double ratio = prior.kappa_prior.log_density(prop[j]) - prior.kappa_prior.log_density(cur[j]) + log_jac;
      for (int c = 0; c < K; ++c)
        ratio += cluster_log_lik(suff[c], count[c], state.locations[c].matrix(), prop, prop_z) -
                 cluster_log_lik(suff[c], count[c], state.locations[c].matrix(), cur, cur_z);
      if (std::log(rng.uniform()) < ratio) {
        cur = prop;
        cur_z = prop_z;
        ++counters.kappa_accepted;
      }
    }
    state.shared_kappa = cur;
    std::fill(state.log_normalizers.begin(), state.log_normalizers.end(), cur_z);
    return;
  }

  for (int c = 0; c < K; ++c) {
    for (int j = 0; j < p; ++j) {
      ++counters.kappa_proposed;
      if (steps.kappa == 0.0) {
        ++counters.kappa_accepted;
        continue;
      }
      const Concentration& cur = state.kappas[c];
      Concentration prop = cur;
      double log_jac = 0.0;
      propose(cur, j, prop, log_jac);
      if (!prior.kappa_prior.in_support(prop[j])) continue;
      const double prop_z = log_0f1(0.5 * d, prop, cfg);
      const Matrix& g = state.locations[c].matrix();
      const double ratio = prior.kappa_prior.log_density(prop[j]) - prior.kappa_prior.log_density(cur[j]) + log_jac +
                           cluster_log_lik(suff[c], count[c], g, prop, prop_z) -
                           cluster_log_lik(suff[c], count[c], g, cur, state.log_normalizers[c]);
      if (std::log(rng.uniform()) < ratio) {
        state.kappas[c] = prop;
        state.log_normalizers[c] = prop_z;
        ++counters.kappa_accepted;
      }
    }
  }
}

void update_alpha(MixtureState& state, const AlphaHyperprior& hyper, Rng& rng) {
  const double n = static_cast<double>(state.assignments.size());
  const double k = state.num_clusters();
  const double eta = rng.beta(state.alpha + 1.0, n);
  const double rate = hyper.rate - std::log(eta);
  const double odds = (hyper.shape + k - 1.0) / (n * rate);
  const double shape = rng.uniform() < odds / (1.0 + odds) ? hyper.shape + k : hyper.shape + k - 1.0;
  state.alpha = std::max(rng.gamma(shape) / rate, std::numeric_limits<double>::min());
}

double log_joint(const MixtureState& state, const Data& data, const PriorSpec& prior) {
  const auto sizes = state.sizes();
  const double n = static_cast<double>(data.size());
  // Ewens partition probability
  double out = static_cast<double>(state.num_clusters()) * std::log(state.alpha) + std::lgamma(state.alpha) -
               std::lgamma(state.alpha + n);
  for (int s : sizes) out += std::lgamma(static_cast<double>(s));
  if (prior.atoms.empty()) {
    if (state.shared_kappa) {
      out += kappa_prior_log(prior.kappa_prior, *state.shared_kappa);
    } else {
      for (const auto& k : state.kappas) out += kappa_prior_log(prior.kappa_prior, k);
    }
  } else {
    out -= static_cast<double>(state.num_clusters()) * std::log(static_cast<double>(prior.atoms.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = state.assignments[i];
    out += kernel_log_lik(data[i], state.locations[c], state.kappa(c), state.log_normalizers[c]);
  }
  return out;
}

ChainOutput run_chain(const Data& data, const PriorSpec& prior, const ChainConfig& config) {
  check_data(data);
  if (!(config.burn_in >= 0 && config.iters > config.burn_in))
    throw Error(ErrorCode::kInvalidArgument, "need iters > burn_in >= 0");
  if (config.thin < 1) throw Error(ErrorCode::kInvalidArgument, "thin must be >= 1");
  if (config.m_aux < 1) throw Error(ErrorCode::kInvalidArgument, "m_aux must be >= 1");
  if (!(config.steps.g >= 0.0) || !(config.steps.kappa >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "step sizes must be >= 0");

  ChainOutput out;
  out.seed = config.seed;
  out.config = config;
  out.prior = prior;
  out.n = static_cast<int>(data.size());
  out.d = data.front().d();
  out.p = data.front().p();

  Rng rng(config.seed);
  MixtureState state = init_state(data, prior, rng, config.hypergeom);
  out.states.reserve(static_cast<std::size_t>((config.iters - config.burn_in) / config.thin));
  for (int t = 1; t <= config.iters; ++t) {
    reassign_sweep(state, data, prior, config.m_aux, rng, config.hypergeom);
    update_cluster_params(state, data, prior, config.steps, rng, out.acceptance, config.hypergeom);
    if (prior.alpha_prior) update_alpha(state, *prior.alpha_prior, rng);
    state.sweep_index = t;
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) {
      out.states.push_back(state);
      out.log_joint.push_back(log_joint(state, data, prior));
    }
  }
  return out;
}

// ---- summaries ----

Eigen::MatrixXi coclustering_matrix(const ChainOutput& chain) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  const auto n = static_cast<Eigen::Index>(chain.states.front().assignments.size());
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n, n);
  std::vector<std::vector<Eigen::Index>> members;
  for (const auto& s : chain.states) {
    members.assign(static_cast<std::size_t>(s.num_clusters()), {});
    for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(s.assignments[i])].push_back(i);
    for (const auto& g : members)
      for (Eigen::Index a : g)
        for (Eigen::Index b : g) ++m(a, b);
  }
  return m;
}

std::map<int, std::size_t> cluster_count_histogram(const ChainOutput& chain, int min_size) {
  if (min_size < 1) throw Error(ErrorCode::kInvalidArgument, "min_size must be >= 1");
  std::map<int, std::size_t> out;
  for (const auto& s : chain.states) {
    int big = 0;
    for (int c : s.sizes())
      if (c >= min_size) ++big;
    ++out[big];
  }
  return out;
}

namespace {

// log of the base-measure marginal kernel density at x. Exact for both base
// measures: Haar locations integrate every kernel to the uniform density.
double log_base_marginal(const StiefelPoint& x, const PriorSpec& prior, const HypergeomConfig& cfg) {
  if (prior.atoms.empty()) return 0.0;
  std::vector<double> terms;
  terms.reserve(prior.atoms.size());
  for (const auto& a : prior.atoms) terms.push_back(log_density(x, a, cfg));
  return log_sum_exp(terms) - std::log(static_cast<double>(prior.atoms.size()));
}

}  // namespace

double log_predictive(const StiefelPoint& x, const ChainOutput& chain) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  if (x.d() != chain.d || x.p() != chain.p) throw Error(ErrorCode::kInvalidShape, "frame shape does not match chain");
  const double g0 = log_base_marginal(x, chain.prior, chain.config.hypergeom);
  const double n = chain.n;
  std::vector<double> per_state;
  per_state.reserve(chain.states.size());
  std::vector<double> terms;
  for (const auto& s : chain.states) {
    const auto sizes = s.sizes();
    terms.clear();
    const double denom = std::log(n + s.alpha);
    for (int c = 0; c < s.num_clusters(); ++c)
      terms.push_back(std::log(static_cast<double>(sizes[c])) - denom +
                      kernel_log_lik(x, s.locations[c], s.kappa(c), s.log_normalizers[c]));
    terms.push_back(std::log(s.alpha) - denom + g0);
    per_state.push_back(log_sum_exp(terms));
  }
  return log_sum_exp(per_state) - std::log(static_cast<double>(per_state.size()));
}

double log_predictive_column(const Vector& v, int column, const ChainOutput& chain, std::size_t max_states) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  if (column < 0 || column >= chain.p) throw Error(ErrorCode::kInvalidArgument, "column out of range");
  if (v.size() != chain.d) throw Error(ErrorCode::kInvalidShape, "vector length does not match d");
  if (max_states < 1) throw Error(ErrorCode::kInvalidArgument, "max_states must be >= 1");
  const auto& cfg = chain.config.hypergeom;
  const std::size_t S = chain.states.size();
  const std::size_t m = std::min(S, max_states);

  double g0 = 0.0;  // uniform on the sphere under a Haar base
  if (!chain.prior.atoms.empty()) {
    std::vector<double> t;
    for (const auto& a : chain.prior.atoms) t.push_back(column_marginal_log_density(v, a, column, cfg));
    g0 = log_sum_exp(t) - std::log(static_cast<double>(t.size()));
  }

  std::vector<double> per_state;
  std::vector<double> terms;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t idx = m == 1 ? S - 1 : static_cast<std::size_t>(std::llround(double(r) * double(S - 1) / double(m - 1)));
    const auto& s = chain.states[idx];
    const auto sizes = s.sizes();
    const double denom = std::log(chain.n + s.alpha);
    terms.clear();
    for (int c = 0; c < s.num_clusters(); ++c)
      terms.push_back(std::log(static_cast<double>(sizes[c])) - denom +
                      column_marginal_log_density(v, s.params(c), column, s.log_normalizers[c], cfg));
    terms.push_back(std::log(s.alpha) - denom + g0);
    per_state.push_back(log_sum_exp(terms));
  }
  return log_sum_exp(per_state) - std::log(static_cast<double>(per_state.size()));
}

const MixtureState& map_state(const ChainOutput& chain) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  const auto it = std::max_element(chain.log_joint.begin(), chain.log_joint.end());
  return chain.states[static_cast<std::size_t>(it - chain.log_joint.begin())];
}

}  // namespace stiefeldp
