#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "stiefeldp/error.hpp"
#include "stiefeldp/mixture.hpp"
#include "support.hpp"

using namespace stiefeldp;

namespace {

Data draws(const LangevinParams& params, int n, Rng& rng) {
  Data out;
  for (int i = 0; i < n; ++i) out.push_back(sample(params, rng, SamplerMethod::kAuto).x);
  return out;
}

Data two_groups(Rng& rng, int each = 10) {
  Data a = draws(LangevinParams(StiefelPoint::identity(3, 2), Concentration{25.0, 25.0}), each, rng);
  Matrix g = Matrix::Zero(3, 2);
  g(2, 0) = 1.0;
  g(0, 1) = -1.0;
  const Data b = draws(LangevinParams(StiefelPoint(g), Concentration{25.0, 25.0}), each, rng);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

ChainOutput stub_chain(std::vector<std::vector<int>> labels) {
  ChainOutput c;
  c.n = static_cast<int>(labels.front().size());
  c.d = 3;
  c.p = 2;
  for (auto& l : labels) {
    MixtureState s;
    s.assignments = l;
    const int k = *std::max_element(l.begin(), l.end()) + 1;
    for (int j = 0; j < k; ++j) {
      s.locations.push_back(StiefelPoint::identity(3, 2));
      s.kappas.push_back(Concentration{1.0, 1.0});
      s.log_normalizers.push_back(log_0f1(1.5, s.kappas.back()));
    }
    c.states.push_back(s);
    c.log_joint.push_back(0.0);
  }
  return c;
}

}  // namespace

TEST_CASE("KappaPrior densities are normalized and draws follow them") {
  const KappaPrior priors[] = {KappaPrior::truncated_exponential(0.1, 5.0), KappaPrior::weibull(3.0, 0.01),
                               KappaPrior::gamma(2.0, 0.5)};
  Rng rng(50);
  for (const auto& pr : priors) {
    const double lo = pr.kind == KappaPrior::Kind::kTruncatedExponential ? pr.lower : 1e-9;
    const double mass = testing::simpson([&](double k) { return std::exp(pr.log_density(k)); }, lo, 400.0, 40000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    std::vector<double> x;
    for (int i = 0; i < 5000; ++i) x.push_back(pr.draw(rng));
    auto cdf = [&](double t) {
      if (t <= lo) return 0.0;
      return testing::simpson([&](double k) { return std::exp(pr.log_density(k)); }, lo, t, 2000);
    };
    CHECK(testing::ks_accepts(testing::ks_statistic(x, cdf), x.size()));
  }
  const auto te = KappaPrior::truncated_exponential(0.1, 5.0);
  CHECK_FALSE(te.in_support(4.999));
  CHECK(te.log_density(4.0) == -std::numeric_limits<double>::infinity());
  CHECK(KappaPrior::point_mass(3.0).draw(rng) == 3.0);
  CHECK_THROWS_AS(KappaPrior::truncated_exponential(-1.0, 5.0), Error);
  CHECK_THROWS_AS(KappaPrior::weibull(0.0, 1.0), Error);
}

TEST_CASE("init_state") {
  Rng rng(51);
  PriorSpec prior;
  const Data one = {sample_haar(3, 2, rng)};
  const auto s = init_state(one, prior, rng);
  CHECK(s.num_clusters() == 1);
  CHECK(s.assignments == std::vector<int>{0});
  CHECK_NOTHROW(s.check_invariants(1));
  CHECK(s.kappa(0)[0] >= 5.0);

  prior.variant = Variant::kLocationOnly;
  const auto lo = init_state(one, prior, rng);
  CHECK(lo.shared_kappa.has_value());
  CHECK(lo.kappas.empty());

  Data mixed = {sample_haar(3, 2, rng), sample_haar(4, 2, rng)};
  CHECK_THROWS_AS(init_state(mixed, prior, rng), Error);
  CHECK_THROWS_AS(init_state(Data{}, prior, rng), Error);
}

TEST_CASE("vanishing alpha never opens a cluster") {
  Rng rng(52);
  const Data data = two_groups(rng);
  PriorSpec prior;
  prior.alpha = 1e-300;
  auto s = init_state(data, prior, rng);
  for (int t = 0; t < 5; ++t) {
    reassign_sweep(s, data, prior, 3, rng);
    CHECK(s.num_clusters() == 1);
  }
}

TEST_CASE("sweeps keep the partition valid") {
  Rng rng(53);
  const Data data = two_groups(rng);
  PriorSpec prior;
  auto s = init_state(data, prior, rng);
  AcceptanceCounters acc;
  for (int t = 0; t < 50; ++t) {
    reassign_sweep(s, data, prior, 3, rng);
    const auto sizes = s.sizes();
    REQUIRE(std::accumulate(sizes.begin(), sizes.end(), 0) == static_cast<int>(data.size()));
    REQUIRE(std::find(sizes.begin(), sizes.end(), 0) == sizes.end());
    REQUIRE(*std::max_element(s.assignments.begin(), s.assignments.end()) == s.num_clusters() - 1);
    update_cluster_params(s, data, prior, {}, rng, acc);
    REQUIRE_NOTHROW(s.check_invariants(data.size()));
  }
  CHECK_THROWS_AS(reassign_sweep(s, data, prior, 0, rng), Error);
  s.assignments[0] = 99;
  CHECK_THROWS_AS(reassign_sweep(s, data, prior, 3, rng), Error);
}

TEST_CASE("identical observations co-cluster more often than antipodal ones") {
  PriorSpec prior;
  prior.kappa_prior = KappaPrior::point_mass(50.0);
  int wins = 0;
  double same_total = 0.0, opposite_total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const StiefelPoint x = sample_haar(3, 2, rng);
    const Data same = {x, x};
    const Data opposite = {x, project(-x.matrix())};
    double frac[2] = {0.0, 0.0};
    const Data* sets[2] = {&same, &opposite};
    for (int k = 0; k < 2; ++k) {
      Rng chain_rng(seed);
      auto s = init_state(*sets[k], prior, chain_rng);
      AcceptanceCounters acc;
      for (int t = 0; t < 200; ++t) {
        reassign_sweep(s, *sets[k], prior, 3, chain_rng);
        update_cluster_params(s, *sets[k], prior, {}, chain_rng, acc);
        frac[k] += s.assignments[0] == s.assignments[1];
      }
      frac[k] /= 200.0;
    }
    same_total += frac[0];
    opposite_total += frac[1];
    wins += frac[0] > frac[1];
  }
  CHECK(same_total > opposite_total);
  CHECK(wins >= 15);
}

TEST_CASE("zero step sizes leave the state unchanged") {
  Rng rng(54);
  const Data data = two_groups(rng);
  PriorSpec prior;
  auto s = init_state(data, prior, rng);
  reassign_sweep(s, data, prior, 3, rng);
  const auto before = s;
  AcceptanceCounters acc;
  update_cluster_params(s, data, prior, StepSizes{0.0, 0.0}, rng, acc);
  CHECK(acc.g_rate() == 1.0);
  CHECK(acc.kappa_rate() == 1.0);
  for (int c = 0; c < s.num_clusters(); ++c) {
    CHECK(s.locations[c].matrix() == before.locations[c].matrix());
    CHECK(s.kappas[c].values() == before.kappas[c].values());
  }
}

TEST_CASE("truncated exponential support is respected") {
  Rng rng(55);
  const Data data = draws(LangevinParams(StiefelPoint::identity(3, 2), Concentration{1.0, 1.0}), 30, rng);
  PriorSpec prior;
  prior.kappa_prior = KappaPrior::truncated_exponential(0.1, 5.0);
  ChainConfig cfg;
  cfg.iters = 300;
  cfg.burn_in = 0;
  cfg.steps.kappa = 0.5;
  cfg.seed = 3;
  const auto out = run_chain(data, prior, cfg);
  for (const auto& s : out.states)
    for (int c = 0; c < s.num_clusters(); ++c)
      for (int j = 0; j < 2; ++j) REQUIRE(s.kappa(c)[j] >= 5.0);
  CHECK(out.acceptance.kappa_accepted > 0);
}

TEST_CASE("single cluster recovers its location") {
  Rng rng(56);
  const StiefelPoint g0 = sample_haar(3, 2, rng);
  const Data data = draws(LangevinParams(g0, Concentration{10.0, 10.0}), 200, rng);
  PriorSpec prior;
  auto s = init_state(data, prior, rng);
  AcceptanceCounters acc;
  double dots[2] = {0.0, 0.0};
  int kept = 0;
  for (int t = 0; t < 2000; ++t) {
    update_cluster_params(s, data, prior, {}, rng, acc);
    if (t >= 1000) {
      for (int j = 0; j < 2; ++j) dots[j] += s.locations[0].col(j).dot(g0.col(j));
      ++kept;
    }
  }
  CHECK(dots[0] / kept >= 0.95);
  CHECK(dots[1] / kept >= 0.95);
}

TEST_CASE("run_chain retention and determinism") {
  Rng rng(57);
  const Data data = two_groups(rng, 6);
  PriorSpec prior;
  ChainConfig cfg;
  cfg.iters = 10;
  cfg.burn_in = 0;
  cfg.seed = 9;
  const auto a = run_chain(data, prior, cfg);
  CHECK(a.states.size() == 10);
  const auto b = run_chain(data, prior, cfg);
  REQUIRE(b.states.size() == a.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].assignments == b.states[i].assignments);
    CHECK(a.log_joint[i] == b.log_joint[i]);
    for (int c = 0; c < a.states[i].num_clusters(); ++c) {
      CHECK(a.states[i].locations[c].matrix() == b.states[i].locations[c].matrix());
      CHECK(a.states[i].kappas[c].values() == b.states[i].kappas[c].values());
    }
  }
  cfg.iters = 20;
  cfg.burn_in = 5;
  cfg.thin = 3;
  CHECK(run_chain(data, prior, cfg).states.size() == 5);
  cfg.burn_in = 20;
  CHECK_THROWS_AS(run_chain(data, prior, cfg), Error);
}

TEST_CASE("coclustering and histogram on stub chains") {
  const auto one = stub_chain({{0, 0, 0}});
  CHECK(coclustering_matrix(one) == Eigen::MatrixXi::Ones(3, 3));
  const auto split = stub_chain({{0, 1, 0}, {0, 1, 1}, {1, 0, 1}});
  const auto m = coclustering_matrix(split);
  CHECK(m == m.transpose());
  CHECK(m(0, 1) == 0);
  CHECK(m(0, 0) == 3);
  CHECK(m(1, 2) == 1);
  CHECK(cluster_count_histogram(one, 1) == std::map<int, std::size_t>{{1, 1}});
  CHECK(cluster_count_histogram(split, 4) == std::map<int, std::size_t>{{0, 3}});
  CHECK_THROWS_AS(cluster_count_histogram(one, 0), Error);
}

TEST_CASE("prior-only predictive with zero concentration is uniform") {
  ChainOutput c;
  c.n = 0;
  c.d = 3;
  c.p = 2;
  c.prior.kappa_prior = KappaPrior::point_mass(0.0);
  c.states.push_back(MixtureState{});
  c.log_joint.push_back(0.0);
  Rng rng(58);
  CHECK(log_predictive(sample_haar(3, 2, rng), c) == 0.0);
}

TEST_CASE("predictive density integrates to one and peaks at the components") {
  Rng rng(59);
  const Data data = two_groups(rng, 15);
  PriorSpec prior;
  ChainConfig cfg;
  cfg.iters = 300;
  cfg.burn_in = 100;
  cfg.thin = 4;
  cfg.seed = 11;
  const auto out = run_chain(data, prior, cfg);
  std::vector<double> v;
  for (int i = 0; i < 20000; ++i) v.push_back(std::exp(log_predictive(sample_haar(3, 2, rng), out)));
  const auto m = testing::moments(v);
  CHECK(std::abs(m.mean - 1.0) <= 3 * m.se);

  const double at_mode = log_predictive(StiefelPoint::identity(3, 2), out);
  CHECK(at_mode > log_predictive(sample_haar(3, 2, rng), out));

  std::vector<double> w;
  for (int i = 0; i < 20000; ++i) w.push_back(std::exp(log_predictive_column(sample_haar(3, 1, rng).col(0), 0, out, 20)));
  const auto mc = testing::moments(w);
  CHECK(std::abs(mc.mean - 1.0) <= 3 * mc.se);

  const auto& best = map_state(out);
  const double top = *std::max_element(out.log_joint.begin(), out.log_joint.end());
  CHECK(log_joint(best, data, prior) == doctest::Approx(top));
}

TEST_CASE("discrete base measure: chain matches the enumerated posterior") {
  Rng rng(60);
  PriorSpec prior;
  for (int f = 0; f < 4; ++f) {
    const StiefelPoint g = sample_haar(3, 2, rng);
    for (double k : {2.0, 6.0}) prior.atoms.emplace_back(g, Concentration{k, k});
  }
  const Data data = {sample(prior.atoms[1], rng).x, sample(prior.atoms[1], rng).x, sample(prior.atoms[5], rng).x};
  const auto exact = testing::partition_posterior(data, prior.atoms, prior.alpha);

  auto s = init_state(data, prior, rng);
  AcceptanceCounters acc;
  std::map<std::vector<int>, double> freq;
  const int sweeps = 200000;
  for (int t = 0; t < sweeps; ++t) {
    reassign_sweep(s, data, prior, 2, rng);
    update_cluster_params(s, data, prior, {}, rng, acc);
    freq[testing::canonical_labels(s.assignments)] += 1.0 / sweeps;
  }
  double tv = 0.0;
  for (const auto& [part, p] : exact) tv += 0.5 * std::abs(p - freq[part]);
  CHECK(tv <= 0.05);
}

TEST_CASE("location-only variant shares one concentration") {
  Rng rng(61);
  const Data data = two_groups(rng, 10);
  PriorSpec prior;
  prior.variant = Variant::kLocationOnly;
  ChainConfig cfg;
  cfg.iters = 100;
  cfg.burn_in = 0;
  cfg.seed = 5;
  const auto out = run_chain(data, prior, cfg);
  bool moved = false;
  for (const auto& s : out.states) {
    REQUIRE(s.kappas.empty());
    REQUIRE(s.shared_kappa.has_value());
    for (int c = 0; c < s.num_clusters(); ++c) {
      REQUIRE(s.kappa(c).values() == s.shared_kappa->values());
      REQUIRE(s.log_normalizers[c] == s.log_normalizers[0]);
    }
    moved = moved || s.shared_kappa->values() != out.states.front().shared_kappa->values();
  }
  CHECK(moved);
}

TEST_CASE("coclustering is exchangeable under data permutation") {
  Rng rng(62);
  const Data data = two_groups(rng, 6);
  const std::size_t n = data.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[0], perm[5]);
  Data permuted;
  for (auto i : perm) permuted.push_back(data[i]);

  PriorSpec prior;
  prior.kappa_prior = KappaPrior::truncated_exponential(0.5, 1.0);
  ChainConfig cfg;
  cfg.iters = 150;
  cfg.burn_in = 50;
  const int seeds = 10;
  std::vector<Eigen::MatrixXd> a, b;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = 100 + s;
    const auto ca = run_chain(data, prior, cfg);
    a.push_back(coclustering_matrix(ca).cast<double>() / double(ca.states.size()));
    cfg.seed = 200 + s;
    const auto cb = run_chain(permuted, prior, cfg);
    const Eigen::MatrixXd mb = coclustering_matrix(cb).cast<double>() / double(cb.states.size());
    Eigen::MatrixXd back(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) back(perm[i], perm[j]) = mb(i, j);
    b.push_back(back);
  }
  double diff = 0.0, se = 0.0;
  int entries = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> va, vb;
      for (int s = 0; s < seeds; ++s) {
        va.push_back(a[s](i, j));
        vb.push_back(b[s](i, j));
      }
      const auto ma = testing::moments(va), mb = testing::moments(vb);
      diff += std::abs(ma.mean - mb.mean);
      se += std::hypot(ma.se, mb.se);
      ++entries;
    }
  CHECK(diff / entries <= 3 * se / entries + 1e-12);
}

TEST_CASE("alpha hyperprior update keeps alpha positive and moves it") {
  Rng rng(63);
  const Data data = two_groups(rng, 8);
  PriorSpec prior;
  prior.alpha_prior = AlphaHyperprior{2.0, 1.0};
  ChainConfig cfg;
  cfg.iters = 50;
  cfg.burn_in = 0;
  cfg.seed = 8;
  const auto out = run_chain(data, prior, cfg);
  std::vector<double> alphas;
  for (const auto& s : out.states) {
    REQUIRE(s.alpha > 0.0);
    alphas.push_back(s.alpha);
  }
  CHECK(*std::max_element(alphas.begin(), alphas.end()) > *std::min_element(alphas.begin(), alphas.end()));
}
