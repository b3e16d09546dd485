// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stiefeldp/stiefeldp.h"

namespace {

struct Failure {
  int exit_code;
};

void check(sdp_status s) {
  if (s != SDP_OK) {
    std::fprintf(stderr, "error: %s\n", sdp_last_error());
    throw Failure{static_cast<int>(s)};
  }
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using RngPtr = std::unique_ptr<sdp_rng, Deleter<sdp_rng, sdp_rng_destroy>>;
using DatasetPtr = std::unique_ptr<sdp_dataset, Deleter<sdp_dataset, sdp_dataset_destroy>>;
using ConfigPtr = std::unique_ptr<sdp_config, Deleter<sdp_config, sdp_config_destroy>>;
using ChainPtr = std::unique_ptr<sdp_chain, Deleter<sdp_chain, sdp_chain_destroy>>;

RngPtr make_rng(uint64_t seed) {
  sdp_rng* r = nullptr;
  check(sdp_rng_create(seed, &r));
  return RngPtr(r);
}

DatasetPtr load_dataset(const std::string& path) {
  sdp_dataset* ds = nullptr;
  check(sdp_dataset_load(path.c_str(), &ds));
  return DatasetPtr(ds);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw CLI::ValidationError("list", "bad number '" + cell + "'");
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Location given as a row-major list, or the identity frame when empty.
std::vector<double> location_or_identity(const std::string& s, int d, int p) {
  if (!s.empty()) {
    auto g = parse_list(s);
    if (g.size() != static_cast<std::size_t>(d * p)) throw CLI::ValidationError("--g", "needs d*p values");
    std::vector<double> out(g.size());
    check(sdp_project(d, p, g.data(), out.data()));
    return out;
  }
  std::vector<double> g(static_cast<std::size_t>(d * p), 0.0);
  for (int j = 0; j < p; ++j) g[static_cast<std::size_t>(j * p + j)] = 1.0;
  return g;
}

std::vector<double> kappa_of(const std::string& s, int p) {
  auto k = parse_list(s);
  if (k.size() == 1 && p > 1) k.assign(static_cast<std::size_t>(p), k.front());
  if (k.size() != static_cast<std::size_t>(p)) throw CLI::ValidationError("--kappa", "needs p values");
  return k;
}

// Kernel parameters from --params-file, or from --kappa plus --g-file / --g.
void resolve_kernel(const std::string& params_file, const std::string& g_file, const std::string& g_s,
                    const std::string& kappa_s, int& d, int& p, std::vector<double>& g, std::vector<double>& k) {
  if (!params_file.empty()) {
    std::ifstream in(params_file);
    if (!in) {
      std::fprintf(stderr, "error: cannot read %s\n", params_file.c_str());
      throw Failure{SDP_ERR_IO};
    }
    std::string header, row;
    std::getline(in, header);
    if (header.rfind("d,p,", 0) != 0 || !std::getline(in, row))
      throw CLI::ValidationError("--params-file", "expected header d,p,kappa1,...,g1_1,... and one row");
    const auto v = parse_list(row);
    if (v.size() < 2) throw CLI::ValidationError("--params-file", "row too short");
    d = static_cast<int>(v[0]);
    p = static_cast<int>(v[1]);
    if (p < 1 || d < p || v.size() != static_cast<std::size_t>(2 + p + d * p))
      throw CLI::ValidationError("--params-file", "expected 2 + p + d*p values");
    k.assign(v.begin() + 2, v.begin() + 2 + p);
    g.resize(static_cast<std::size_t>(d * p));
    check(sdp_project(d, p, v.data() + 2 + p, g.data()));
    return;
  }
  if (kappa_s.empty()) throw CLI::ValidationError("--kappa", "required unless --params-file is given");
  if (!g_file.empty()) {
    auto ds = load_dataset(g_file);
    std::size_t n = 0;
    check(sdp_dataset_info(ds.get(), &n, &d, &p, nullptr));
    if (n == 0) throw CLI::ValidationError("--g-file", "no frames");
    g.resize(static_cast<std::size_t>(d * p));
    check(sdp_dataset_frame(ds.get(), 0, g.data()));
  } else {
    g = location_or_identity(g_s, d, p);
  }
  k = kappa_of(kappa_s, p);
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    throw Failure{SDP_ERR_IO};
  }
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet process mixtures of matrix Langevin kernels on Stiefel manifolds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sdp_version()));

  // fit
  std::string data_path, config_path, out_dir;
  uint64_t seed = 0;
  int iters = -1, burn_in = -1, thin = -1;
  std::size_t haar_grid = 200, sphere_grid = 400;
  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler and write chain files plus summaries");
  fit->add_option("--data", data_path, "frames CSV")->required();
  fit->add_option("--config", config_path, "run configuration (TOML-style)");
  auto* fit_seed = fit->add_option("--seed", seed, "RNG seed (overrides the config)");
  fit->add_option("--out", out_dir, "output directory")->required();
  fit->add_option("--iters", iters, "override iterations");
  fit->add_option("--burn-in", burn_in, "override burn-in");
  fit->add_option("--thin", thin, "override thinning");
  fit->add_option("--haar-grid", haar_grid, "Haar frames in predictive_grid.csv");
  fit->add_option("--sphere-grid", sphere_grid, "directions per column marginal");

  // summarize
  std::string run_dir;
  auto* summarize = app.add_subcommand("summarize", "recompute summaries from a finished run");
  summarize->add_option("--run", run_dir, "directory written by fit")->required();
  summarize->add_option("--data", data_path, "frames CSV used for the fit")->required();
  summarize->add_option("--out", out_dir, "output directory (defaults to the run directory)");
  summarize->add_option("--haar-grid", haar_grid);
  summarize->add_option("--sphere-grid", sphere_grid);

  // sample / density, also reachable as `langevin sample|density`
  int d = 3, p = 2;
  std::string kappa_s, g_s, g_file, params_file, method_s = "auto", out_path;
  std::size_t count = 100;
  auto kernel_options = [&](CLI::App* c) {
    c->add_option("--d", d);
    c->add_option("--p", p);
    c->add_option("--kappa", kappa_s, "comma-separated concentrations");
    c->add_option("--g", g_s, "row-major location (identity frame if omitted)");
    c->add_option("--g-file", g_file, "frames CSV whose first frame is the location");
    c->add_option("--params-file", params_file, "CSV with header d,p,kappa1..,g1_1.. and one row");
    c->add_option("--out", out_path, "output CSV (stdout if omitted)");
  };
  auto sample_options = [&](CLI::App* c) {
    kernel_options(c);
    c->add_option("--n", count, "number of draws");
    c->add_option("--method", method_s)->check(CLI::IsMember({"haar", "column", "auto"}));
    c->add_option("--seed", seed)->required();
  };
  auto density_options = [&](CLI::App* c) {
    kernel_options(c);
    c->add_option("--data,--x-file", data_path, "frames CSV to evaluate")->required();
  };
  auto* samp = app.add_subcommand("sample", "draw frames from a matrix Langevin distribution");
  sample_options(samp);
  auto* dens = app.add_subcommand("density", "evaluate the matrix Langevin log density at frames");
  density_options(dens);
  auto* lang = app.add_subcommand("langevin", "matrix Langevin kernel tools");
  lang->require_subcommand(1);
  auto* lang_samp = lang->add_subcommand("sample", "draw frames from a matrix Langevin distribution");
  sample_options(lang_samp);
  auto* lang_dens = lang->add_subcommand("density", "evaluate the matrix Langevin log density at frames");
  density_options(lang_dens);

  // hypergeom eval
  double half_d = 0.0;
  int order = 0;
  bool mc_check = false;
  std::size_t mc_samples = 1000000;
  auto* hg = app.add_subcommand("hypergeom", "hypergeometric function of a matrix argument");
  auto* hg_eval = hg->add_subcommand("eval", "log 0F1(d/2; diag(kappa^2)/4)");
  hg->require_subcommand(1);
  hg_eval->add_option("--d", d)->required();
  hg_eval->add_option("--kappa", kappa_s)->required();
  hg_eval->add_option("--order", order, "minimum truncation order");
  hg_eval->add_flag("--mc-check", mc_check, "compare against a Monte Carlo estimate");
  hg_eval->add_option("--samples", mc_samples);
  hg_eval->add_option("--seed", seed);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "numerical checks of the theoretical conditions");
  diag->require_subcommand(1);
  std::string kappa2_s, g2_s, grid_s, bounds_s, prior_s = "weibull", params_s, n_s = "1000,10000";
  std::size_t samples = 100000, n_outer = 1000, n_inner = 1000, trials = 2000, draws = 1000000;
  double a = 0.03, beta = 0.01;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--d", d);
    c->add_option("--p", p);
    c->add_option("--seed", seed);
    c->add_option("--out", out_path, "CSV output (stdout if omitted)");
  };
  auto* d_hel = diag->add_subcommand("hellinger", "Hellinger distance between two Langevin kernels");
  auto* d_kl = diag->add_subcommand("kl", "KL divergence KL(f0 || f) between two Langevin kernels");
  for (auto* c : {d_hel, d_kl}) {
    add_common(c);
    c->add_option("--kappa", kappa_s, "concentration of the first kernel")->required();
    c->add_option("--g", g_s);
    c->add_option("--kappa2", kappa2_s, "concentration of the second kernel")->required();
    c->add_option("--g2", g2_s);
    c->add_option("--samples", samples);
  }
  auto* d_app = diag->add_subcommand("approx", "kernel approximation error over a kappa grid");
  add_common(d_app);
  d_app->add_option("--kappa", kappa_s, "concentration of the target density")->required();
  d_app->add_option("--grid", grid_s, "kernel concentrations (isotropic)")->required();
  d_app->add_option("--outer", n_outer);
  d_app->add_option("--inner", n_inner);
  auto* d_lip = diag->add_subcommand("lipschitz", "Lipschitz ratios and log-log slopes");
  add_common(d_lip);
  d_lip->add_option("--grid", grid_s, "isotropic kappa values for the location ratio")->default_str("1,2,5,10,20,40");
  d_lip->add_option("--bounds", bounds_s, "phi bounds for the concentration ratio")->default_str("5,10,20,40");
  d_lip->add_option("--trials", trials);
  auto* d_tail = diag->add_subcommand("tail", "prior tail condition");
  add_common(d_tail);
  d_tail->add_option("--prior", prior_s)->check(CLI::IsMember({"truncated-exponential", "weibull", "gamma", "point-mass"}));
  d_tail->add_option("--params", params_s, "prior parameters")->required();
  d_tail->add_option("--a", a);
  d_tail->add_option("--beta", beta);
  d_tail->add_option("--n", n_s, "sample sizes");
  d_tail->add_option("--draws", draws);

  // conversions
  std::string in_path;
  auto* conv = app.add_subcommand("convert-orbits", "orbital elements (degrees) to V_{3,2} frames");
  conv->add_option("--in", in_path, "CSV id,inclination,lon_ascending_node,arg_perihelion")->required();
  conv->add_option("--out", out_path, "frames CSV")->required();
  auto* synth = app.add_subcommand("synth", "write the 162-frame synthetic stand-in data set");
  synth->add_option("--seed", seed)->required();
  synth->add_option("--out", out_path, "frames CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      sdp_config* raw = nullptr;
      check(config_path.empty() ? sdp_config_default(&raw) : sdp_config_load(config_path.c_str(), &raw));
      ConfigPtr cfg(raw);
      if (fit_seed->count()) check(sdp_config_set_seed(cfg.get(), seed));
      if (iters >= 0 || burn_in >= 0 || thin >= 0) {
        int it = 0, bi = 0, th = 0;
        check(sdp_config_get_iterations(cfg.get(), &it, &bi, &th));
        check(sdp_config_set_iterations(cfg.get(), iters >= 0 ? iters : it, burn_in >= 0 ? burn_in : bi,
                                        thin >= 0 ? thin : th));
      }
      auto ds = load_dataset(data_path);
      sdp_chain* chain_raw = nullptr;
      check(sdp_fit(ds.get(), cfg.get(), &chain_raw));
      ChainPtr chain(chain_raw);
      check(sdp_chain_write(chain.get(), out_dir.c_str()));
      check(sdp_chain_summarize(chain.get(), ds.get(), out_dir.c_str(), haar_grid, sphere_grid));
      int modal = 0;
      check(sdp_chain_modal_clusters(chain.get(), 5, &modal));
      std::printf("wrote %s (modal clusters with >= 5 members: %d)\n", out_dir.c_str(), modal);
    } else if (summarize->parsed()) {
      sdp_chain* chain_raw = nullptr;
      check(sdp_chain_load(run_dir.c_str(), &chain_raw));
      ChainPtr chain(chain_raw);
      auto ds = load_dataset(data_path);
      const std::string dest = out_dir.empty() ? run_dir : out_dir;
      check(sdp_chain_summarize(chain.get(), ds.get(), dest.c_str(), haar_grid, sphere_grid));
      std::printf("wrote %s\n", dest.c_str());
    } else if (samp->parsed() || lang_samp->parsed()) {
      std::vector<double> g, k;
      resolve_kernel(params_file, g_file, g_s, kappa_s, d, p, g, k);
      const sdp_sampler m = method_s == "haar" ? SDP_SAMPLER_HAAR_REJECTION
                            : method_s == "column" ? SDP_SAMPLER_COLUMN_REJECTION
                                                   : SDP_SAMPLER_AUTO;
      auto rng = make_rng(seed);
      std::vector<double> frames(count * static_cast<std::size_t>(d * p));
      uint64_t proposals = 0;
      check(sdp_langevin_sample(d, p, g.data(), k.data(), m, rng.get(), count, frames.data(), &proposals));
      sdp_dataset* raw = nullptr;
      check(sdp_dataset_from_frames(count, d, p, frames.data(), &raw));
      DatasetPtr ds(raw);
      if (out_path.empty()) {
        const std::string tmp = "/dev/stdout";
        check(sdp_dataset_save(ds.get(), tmp.c_str()));
      } else {
        check(sdp_dataset_save(ds.get(), out_path.c_str()));
      }
      std::fprintf(stderr, "acceptance rate %.6f\n", proposals ? static_cast<double>(count) / proposals : 1.0);
    } else if (dens->parsed() || lang_dens->parsed()) {
      std::vector<double> g, k;
      resolve_kernel(params_file, g_file, g_s, kappa_s, d, p, g, k);
      auto ds = load_dataset(data_path);
      std::size_t n = 0;
      int dd = 0, pp = 0;
      check(sdp_dataset_info(ds.get(), &n, &dd, &pp, nullptr));
      if (dd != d || pp != p) throw CLI::ValidationError("--data", "frame shape differs from --d/--p");
      std::ofstream file;
      std::ostream& out = output(out_path, file);
      out << "index,log_density\n";
      std::vector<double> x(static_cast<std::size_t>(d * p));
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        check(sdp_dataset_frame(ds.get(), i, x.data()));
        check(sdp_langevin_log_density(d, p, g.data(), k.data(), x.data(), &v));
        out << i << ',' << fmt(v) << '\n';
      }
    } else if (hg_eval->parsed()) {
      auto k = parse_list(kappa_s);
      half_d = 0.5 * d;
      double v = 0.0;
      int used = 0;
      check(sdp_log_0f1(half_d, k.data(), static_cast<int>(k.size()), order, &v, &used));
      std::printf("log_0f1,%s\norder,%d\n", fmt(v).c_str(), used);
      if (mc_check) {
        auto rng = make_rng(seed);
        double est = 0.0, se = 0.0;
        check(sdp_mc_normalizer(d, static_cast<int>(k.size()), k.data(), mc_samples, rng.get(), &est, &se));
        std::printf("mc_estimate,%s\nmc_std_error,%s\nz_score,%s\n", fmt(est).c_str(), fmt(se).c_str(),
                    fmt((std::exp(v) - est) / se).c_str());
      }
    } else if (d_hel->parsed() || d_kl->parsed()) {
      const auto k1 = kappa_of(kappa_s, p), k2 = kappa_of(kappa2_s, p);
      const auto g1 = location_or_identity(g_s, d, p), g2 = location_or_identity(g2_s, d, p);
      auto rng = make_rng(seed);
      double est = 0.0, se = 0.0;
      if (d_hel->parsed())
        check(sdp_hellinger_langevin(d, p, g1.data(), k1.data(), g2.data(), k2.data(), samples, rng.get(), &est, &se));
      else
        check(sdp_kl_langevin(d, p, g1.data(), k1.data(), g2.data(), k2.data(), samples, rng.get(), &est, &se));
      std::ofstream file;
      std::ostream& out = output(out_path, file);
      out << "estimate,std_error\n" << fmt(est) << ',' << fmt(se) << '\n';
    } else if (d_app->parsed()) {
      const auto kf = kappa_of(kappa_s, p);
      const auto g = location_or_identity("", d, p);
      auto rng = make_rng(seed);
      std::ofstream file;
      std::ostream& out = output(out_path, file);
      out << "kappa,error,max_inner_se\n";
      for (double kk : parse_list(grid_s)) {
        std::vector<double> kern(static_cast<std::size_t>(p), kk);
        double err = 0.0, se = 0.0;
        check(sdp_kernel_approx_langevin(d, p, g.data(), kf.data(), kern.data(), n_outer, n_inner, rng.get(), &err, &se));
        out << fmt(kk) << ',' << fmt(err) << ',' << fmt(se) << '\n';
      }
    } else if (d_lip->parsed()) {
      if (grid_s.empty()) grid_s = "1,2,5,10,20,40";
      if (bounds_s.empty()) bounds_s = "5,10,20,40";
      auto rng = make_rng(seed);
      std::ofstream file;
      std::ostream& out = output(out_path, file);
      out << "kind,parameter,phi,max_ratio\n";
      std::vector<double> xs, ys, bs, cs;
      for (double kk : parse_list(grid_s)) {
        std::vector<double> k(static_cast<std::size_t>(p), kk);
        double ph = 0.0, r = 0.0;
        check(sdp_phi(k.data(), p, &ph));
        check(sdp_lipschitz_location(d, p, k.data(), trials, rng.get(), &r));
        out << "location," << fmt(kk) << ',' << fmt(ph) << ',' << fmt(r) << '\n';
        xs.push_back(ph);
        ys.push_back(r);
      }
      for (double b : parse_list(bounds_s)) {
        double r = 0.0;
        check(sdp_lipschitz_concentration(d, p, b, trials, rng.get(), &r));
        out << "concentration," << fmt(b) << ',' << fmt(b) << ',' << fmt(r) << '\n';
        bs.push_back(b);
        cs.push_back(r);
      }
      // fitted exponents; a zero ratio (kappa = 0) has no logarithm
      double slope = 0.0;
      if (xs.size() >= 2 && std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0; })) {
        check(sdp_log_log_slope(xs.data(), ys.data(), xs.size(), &slope));
        out << "location_slope,,," << fmt(slope) << '\n';
      }
      if (bs.size() >= 2) {
        check(sdp_log_log_slope(bs.data(), cs.data(), bs.size(), &slope));
        out << "concentration_slope,,," << fmt(slope) << '\n';
      }
    } else if (d_tail->parsed()) {
      const auto params = parse_list(params_s);
      std::vector<long> ns;
      for (double v : parse_list(n_s)) ns.push_back(static_cast<long>(v));
      std::vector<double> mass(ns.size()), bound(ns.size());
      std::vector<int> pass(ns.size());
      auto rng = make_rng(seed);
      check(sdp_tail_check(prior_s.c_str(), params.data(), params.size(), d, p, a, beta, ns.data(), ns.size(), draws,
                           rng.get(), mass.data(), bound.data(), pass.data()));
      std::ofstream file;
      std::ostream& out = output(out_path, file);
      out << "n,threshold,mass,bound,pass\n";
      for (std::size_t i = 0; i < ns.size(); ++i)
        out << ns[i] << ',' << fmt(std::pow(static_cast<double>(ns[i]), a)) << ',' << fmt(mass[i]) << ','
            << fmt(bound[i]) << ',' << (pass[i] ? "true" : "false") << '\n';
    } else if (conv->parsed()) {
      sdp_dataset* raw = nullptr;
      check(sdp_dataset_convert_orbits(in_path.c_str(), &raw));
      DatasetPtr ds(raw);
      check(sdp_dataset_save(ds.get(), out_path.c_str()));
    } else if (synth->parsed()) {
      sdp_dataset* raw = nullptr;
      check(sdp_dataset_synthetic(seed, &raw));
      DatasetPtr ds(raw);
      check(sdp_dataset_save(ds.get(), out_path.c_str()));
    }
  } catch (const Failure& f) {
    return f.exit_code;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 0;
}
