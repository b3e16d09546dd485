// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "stiefeldp/diagnostics.hpp"
#include "stiefeldp/hypergeom.hpp"
#include "stiefeldp/io.hpp"
#include "stiefeldp/langevin.hpp"
#include "stiefeldp/mixture.hpp"
#include "stiefeldp/summaries.hpp"
#include "support.hpp"

using namespace stiefeldp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome c1_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double k : {0.1, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    clear_hypergeom_cache();
    worst = std::max(worst, std::abs(log_0f1(1.5, Concentration{k}) - testing::log_sinhc(k)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-8 && secs < 1.0, fmt("max |error| = %.2e, %.3f s", worst, secs)};
}

Outcome c2_series_vs_mc() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2);
  int agree = 0;
  double worst = 0.0;
  for (double a : {0.0, 3.0, 6.0, 9.0, 12.0})
    for (double b : {0.0, 3.0, 6.0, 9.0, 12.0}) {
      const Concentration k{a, b};
      const auto mc = mc_normalizer(3, k, sample_haar(3, 2, rng), 1000000, rng);
      const double series = std::exp(log_0f1(1.5, k));
      const double z = mc.std_error > 0 ? std::abs(series - mc.estimate) / mc.std_error
                                        : (series == mc.estimate ? 0.0 : INFINITY);
      worst = std::max(worst, z);
      agree += z <= 3.0;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {agree == 25 && secs < 120.0, fmt("%d/25 within 3 SE (max %.2f SE), %.1f s", agree, worst, secs)};
}

Outcome c3_sampler_moments() {
  Rng rng(3);
  const LangevinParams params(sample_haar(3, 1, rng), Concentration{5.0});
  const int n = 100000;
  std::vector<double> t;
  std::uint64_t proposals = 0;
  for (int i = 0; i < n; ++i) {
    const auto draw = sample(params, rng, SamplerMethod::kHaarRejection);
    proposals += draw.proposals;
    t.push_back(params.location.col(0).dot(draw.x.col(0)));
  }
  const auto m = testing::moments(t);
  const double expect_mean = 1.0 / std::tanh(5.0) - 0.2;
  const double rate = double(n) / double(proposals);
  const double expect_rate = std::sinh(5.0) / 5.0 / std::exp(5.0);
  const double rate_se = std::sqrt(expect_rate * (1 - expect_rate) / double(proposals));
  const bool ok = std::abs(m.mean - expect_mean) <= 3 * m.se && std::abs(rate - expect_rate) <= 3 * rate_se;
  return {ok, fmt("mean %.5f (target %.5f, SE %.1e), acceptance %.5f (target %.5f, SE %.1e)", m.mean, expect_mean,
                  m.se, rate, expect_rate, rate_se)};
}

Outcome c4_normalization() {
  Rng rng(4);
  int ok = 0;
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const LangevinParams params(sample_haar(3, 2, rng), Concentration{15 * rng.uniform(), 15 * rng.uniform()});
    std::vector<double> v;
    v.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) v.push_back(std::exp(log_density(sample_haar(3, 2, rng), params)));
    const auto m = testing::moments(v);
    const double z = std::abs(m.mean - 1.0) / m.se;
    worst = std::max(worst, z);
    ok += z <= 3.0;
  }
  return {ok == 10, fmt("%d/10 parameter sets integrate to 1 within 3 SE (max %.2f SE)", ok, worst)};
}

Outcome c5_mode() {
  Rng rng(5);
  int ok = 0;
  for (int s = 0; s < 20; ++s) {
    const LangevinParams params(sample_haar(3, 2, rng), Concentration{5 + 15 * rng.uniform(), 5 + 15 * rng.uniform()});
    const double at_mode = log_density(params.location, params);
    bool all = true;
    for (int i = 0; i < 10000 && all; ++i) all = log_density(sample_haar(3, 2, rng), params) < at_mode;
    ok += all;
  }
  return {ok == 20, fmt("%d/20 parameter sets", ok)};
}

Outcome c6_micro_posterior() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(6);
  PriorSpec prior;
  for (int f = 0; f < 4; ++f) {
    const StiefelPoint g = sample_haar(3, 2, rng);
    for (double k : {2.0, 6.0}) prior.atoms.emplace_back(g, Concentration{k, k});
  }
  const Data data = {sample(prior.atoms[1], rng).x, sample(prior.atoms[3], rng).x, sample(prior.atoms[5], rng).x};
  const auto exact = testing::partition_posterior(data, prior.atoms, prior.alpha);
  auto state = init_state(data, prior, rng);
  AcceptanceCounters acc;
  std::map<std::vector<int>, double> freq;
  const int sweeps = 1000000;
  for (int t = 0; t < sweeps; ++t) {
    reassign_sweep(state, data, prior, 3, rng);
    update_cluster_params(state, data, prior, {}, rng, acc);
    freq[testing::canonical_labels(state.assignments)] += 1.0 / sweeps;
  }
  double tv = 0.0;
  for (const auto& [part, p] : exact) tv += 0.5 * std::abs(p - freq[part]);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {tv <= 0.05 && secs < 600.0, fmt("TV = %.4f over %zu partitions, %.1f s", tv, exact.size(), secs)};
}

// Three well-separated Haar locations on V_{3,2}.
std::vector<StiefelPoint> separated_locations(Rng& rng, double min_distance) {
  for (;;) {
    std::vector<StiefelPoint> g{sample_haar(3, 2, rng), sample_haar(3, 2, rng), sample_haar(3, 2, rng)};
    bool ok = true;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) ok = ok && frobenius_distance(g[i], g[j]) >= min_distance;
    if (ok) return g;
  }
}

void draw_mixture(const std::vector<LangevinParams>& comps, int n, Rng& rng, Data& data, std::vector<int>& labels) {
  for (int i = 0; i < n; ++i) {
    const int c = i * static_cast<int>(comps.size()) / n;
    data.push_back(sample(comps[c], rng).x);
    labels.push_back(c);
  }
}

Outcome c7_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(700 + seed);
    std::vector<LangevinParams> comps;
    for (const auto& g : separated_locations(rng, 1.0)) comps.emplace_back(g, Concentration{30.0, 30.0});
    Data data;
    std::vector<int> truth;
    draw_mixture(comps, 150, rng, data, truth);
    PriorSpec prior;  // alpha = 1, exponential kappa prior truncated to [5, inf)
    ChainConfig cfg;
    cfg.iters = 6000;
    cfg.burn_in = 1000;
    cfg.seed = seed;
    const auto chain = run_chain(data, prior, cfg);
    const int modal = modal_cluster_count(chain, 5);
    const double ari = testing::adjusted_rand_index(map_state(chain).assignments, truth);
    const bool good = modal == 3 && ari >= 0.9;
    ok += good;
    per_seed << (seed ? "; " : "") << "K=" << modal << " ARI=" << fmt("%.3f", ari);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ok >= 4 && secs < 1800.0, fmt("%d/5 seeds recover (%s), %.0f s", ok, per_seed.str().c_str(), secs)};
}

Outcome c8_consistency_trend() {
  Rng world(800);
  std::vector<LangevinParams> comps;
  for (const auto& g : separated_locations(world, 1.0)) comps.emplace_back(g, Concentration{15.0, 15.0});
  const auto truth = DensityHandle::langevin_mixture(comps, {1.0, 1.0, 1.0});
  std::vector<double> med;
  std::ostringstream detail;
  for (int n : {50, 200}) {
    std::vector<double> h;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(8000 + 100 * n + seed);
      Data data;
      std::vector<int> labels;
      draw_mixture(comps, n, rng, data, labels);
      PriorSpec prior;
      ChainConfig cfg;
      cfg.iters = 2000;
      cfg.burn_in = 500;
      cfg.thin = 5;
      cfg.seed = seed;
      const auto chain = run_chain(data, prior, cfg);
      const auto pred = DensityHandle::predictive(chain, 100);
      h.push_back(hellinger_mc(pred, truth, 20000, rng, &truth).estimate);
    }
    med.push_back(testing::median(h));
    detail << "n=" << n << ": median " << fmt("%.4f", med.back()) << (n == 50 ? "; " : "");
  }
  return {med[1] < med[0], detail.str()};
}

Outcome c9_kernel_limit() {
  Rng world(900);
  const auto f = DensityHandle::langevin(LangevinParams(sample_haar(3, 2, world), Concentration{5.0, 5.0}));
  std::vector<double> med;
  for (double k : {5.0, 20.0, 80.0}) {
    std::vector<double> e;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(9000 + seed);
      e.push_back(kernel_approx_error(f, Concentration{k, k}, 1000, 1000, rng).error);
    }
    med.push_back(testing::median(e));
  }
  return {med[0] > med[1] && med[1] > med[2],
          fmt("median error %.4f (5) > %.4f (20) > %.4f (80)", med[0], med[1], med[2])};
}

Outcome c10_lipschitz() {
  Rng rng(10);
  std::vector<double> phis, loc;
  for (double k : {2.0, 5.0, 10.0, 20.0}) {
    const Concentration kappa{k, k};
    phis.push_back(phi(kappa));
    loc.push_back(lipschitz_ratio_location(3, kappa, 10000, rng));
  }
  std::vector<double> bounds{5.0, 10.0, 20.0, 40.0}, conc;
  for (double b : bounds) conc.push_back(lipschitz_ratio_concentration(3, 2, b, 10000, rng));
  const double s1 = log_log_slope(phis, loc), s2 = log_log_slope(bounds, conc);
  return {s1 <= 4.5 && s2 <= 2.5, fmt("location slope %.3f (<= 4.5), concentration slope %.3f (<= 2.5)", s1, s2)};
}

Outcome c11_tail() {
  Rng rng(11);
  const double a = 0.03;
  const auto weibull = tail_condition_check(KappaPrior::weibull(1.0 / a, 1.0), 3, 2, a, 0.01, {1000, 10000}, rng);
  const auto gamma = tail_condition_check(KappaPrior::gamma(1.0, 0.1), 3, 2, a, 0.01, {10000}, rng);
  const bool ok = weibull[0].pass && weibull[1].pass && !gamma[0].pass;
  return {ok, fmt("weibull mass %.3g / %.3g (bound %.3g / %.3g, threshold %.3f / %.3f); gamma mass %.3g (bound %.3g)",
                  weibull[0].mass, weibull[1].mass, weibull[0].bound, weibull[1].bound, weibull[0].threshold,
                  weibull[1].threshold, gamma[0].mass, gamma[0].bound)};
}

Outcome c12_neo_run() {
  const char* env = std::getenv("STIEFELDP_NEO_FRAMES");
  const bool real = env && std::filesystem::exists(env);
  const Dataset data = real ? parse_frames_csv(std::string(env)) : synthetic_neo_standin(12);
  PriorSpec prior;
  ChainConfig cfg;
  cfg.iters = 6000;
  cfg.burn_in = 1000;
  cfg.seed = 12;
  const auto chain = run_chain(data.frames, prior, cfg);
  const int modal = modal_cluster_count(chain, 10);
  const auto hist = cluster_count_histogram(chain, 1);
  std::ostringstream h;
  for (const auto& [k, f] : hist) h << ' ' << k << ':' << f;
  if (real) {
    const bool ok = modal >= 2 && modal <= 4;
    return {ok, fmt("real data n=%zu, modal large-cluster count %d; histogram%s", data.size(), modal, h.str().c_str())};
  }
  return {true, fmt("synthetic stand-in (reported, not asserted) n=%zu, modal large-cluster count %d; histogram%s",
                    data.size(), modal, h.str().c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"C1 normalizer closed form", c1_closed_form},
      {"C2 normalizer vs Monte Carlo", c2_series_vs_mc},
      {"C3 sampler moments", c3_sampler_moments},
      {"C4 density normalization", c4_normalization},
      {"C5 mode check", c5_mode},
      {"C6 micro-scale posterior", c6_micro_posterior},
      {"C7 synthetic recovery", c7_recovery},
      {"C8 consistency trend", c8_consistency_trend},
      {"C9 kernel approximation limit", c9_kernel_limit},
      {"C10 Lipschitz exponents", c10_lipschitz},
      {"C11 tail condition", c11_tail},
      {"C12 NEO-shaped run", c12_neo_run},
  };
  // optional filter: run only criteria whose label starts with one of the arguments
  auto selected = [&](const std::string& label) {
    if (argc < 2) return true;
    for (int i = 1; i < argc; ++i)
      if (label.rfind(std::string(argv[i]) + " ", 0) == 0) return true;
    return false;
  };
  int failed = 0;
  for (const auto& [label, run] : criteria) {
    if (!selected(label)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", label.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed ? 1 : 0;
}
