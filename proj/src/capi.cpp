#include "stiefeldp/stiefeldp.h"

#include <cstring>
#include <new>
#include <string>

#include "stiefeldp/config.hpp"
#include "stiefeldp/diagnostics.hpp"
#include "stiefeldp/error.hpp"
#include "stiefeldp/io.hpp"
#include "stiefeldp/langevin.hpp"
#include "stiefeldp/mixture.hpp"
#include "stiefeldp/summaries.hpp"

using namespace stiefeldp;

struct sdp_rng {
  Rng rng;
};
struct sdp_dataset {
  Dataset data;
};
struct sdp_config {
  RunConfig config;
};
struct sdp_chain {
  ChainOutput chain;
  RunConfig config;
};

namespace {

thread_local std::string g_last_error;

sdp_status fail(sdp_status code, const char* what) {
  g_last_error = what;
  return code;
}

sdp_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return SDP_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInvalidShape: return SDP_ERR_INVALID_SHAPE;
    case ErrorCode::kDegenerateInput: return SDP_ERR_DEGENERATE_INPUT;
    case ErrorCode::kTruncationInsufficient: return SDP_ERR_TRUNCATION;
    case ErrorCode::kConcentrationTooLarge: return SDP_ERR_CONCENTRATION_TOO_LARGE;
    case ErrorCode::kParse: return SDP_ERR_PARSE;
    case ErrorCode::kDataQuality: return SDP_ERR_DATA_QUALITY;
    case ErrorCode::kIo: return SDP_ERR_IO;
    case ErrorCode::kInvariantViolation: return SDP_ERR_INVARIANT;
  }
  return SDP_ERR_INTERNAL;
}

template <typename F>
sdp_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SDP_OK;
  } catch (const Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SDP_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(SDP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SDP_ERR_INTERNAL, "unknown error");
  }
}

template <typename T>
void need(const T* ptr, const char* name) {
  if (!ptr) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
}

void check_shape(int d, int p) {
  if (p < 1 || d < p) throw Error(ErrorCode::kInvalidShape, "need 1 <= p <= d");
}

Concentration read_kappa(const double* kappa, int p) {
  need(kappa, "kappa");
  return Concentration(Eigen::Map<const Vector>(kappa, p));
}

StiefelPoint read_frame(const double* m, int d, int p, const char* name) {
  need(m, name);
  return StiefelPoint::from_row_major(d, p, m);
}

void write_frame(const StiefelPoint& x, double* out) {
  const auto v = x.row_major();
  std::memcpy(out, v.data(), v.size() * sizeof(double));
}

LangevinParams read_params(int d, int p, const double* g, const double* kappa) {
  check_shape(d, p);
  return LangevinParams(read_frame(g, d, p, "g"), read_kappa(kappa, p));
}

Rng& rng_of(sdp_rng* r) {
  need(r, "rng");
  return r->rng;
}

}  // namespace

extern "C" {

const char* sdp_last_error(void) { return g_last_error.c_str(); }

const char* sdp_version(void) { return "0.1.0"; }

sdp_status sdp_rng_create(uint64_t seed, sdp_rng** out) {
  return guard([&] {
    need(out, "out");
    *out = new sdp_rng{Rng(seed)};
  });
}

void sdp_rng_destroy(sdp_rng* rng) { delete rng; }

sdp_status sdp_sample_haar(int d, int p, sdp_rng* rng, double* out) {
  return guard([&] {
    check_shape(d, p);
    need(out, "out");
    write_frame(sample_haar(d, p, rng_of(rng)), out);
  });
}

sdp_status sdp_project(int d, int p, const double* m, double* out) {
  return guard([&] {
    check_shape(d, p);
    need(m, "m");
    need(out, "out");
    const Matrix mm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(m, d, p);
    write_frame(project(mm), out);
  });
}

sdp_status sdp_orthonormality_deviation(int d, int p, const double* m, double* out) {
  return guard([&] {
    check_shape(d, p);
    need(m, "m");
    need(out, "out");
    const Matrix mm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(m, d, p);
    *out = orthonormality_deviation(mm);
  });
}

sdp_status sdp_log_0f1(double half_d, const double* kappa, int p, int min_order, double* log_value,
                       int* order_used) {
  return guard([&] {
    need(log_value, "log_value");
    if (p < 1) throw Error(ErrorCode::kInvalidShape, "p must be >= 1");
    HypergeomConfig cfg;
    if (min_order > 0) cfg.truncation_order = min_order;
    const SeriesValue v = log_0f1_detailed(half_d, read_kappa(kappa, p), cfg);
    *log_value = v.log_value;
    if (order_used) *order_used = v.order;
  });
}

sdp_status sdp_mc_normalizer(int d, int p, const double* kappa, size_t n_samples, sdp_rng* rng, double* estimate,
                             double* std_error) {
  return guard([&] {
    check_shape(d, p);
    need(estimate, "estimate");
    need(std_error, "std_error");
    const McEstimate e = mc_normalizer(d, read_kappa(kappa, p), StiefelPoint::identity(d, p), n_samples, rng_of(rng));
    *estimate = e.estimate;
    *std_error = e.std_error;
  });
}

sdp_status sdp_langevin_log_density(int d, int p, const double* g, const double* kappa, const double* x,
                                    double* out) {
  return guard([&] {
    need(out, "out");
    const auto params = read_params(d, p, g, kappa);
    *out = log_density(read_frame(x, d, p, "x"), params);
  });
}

sdp_status sdp_langevin_sample(int d, int p, const double* g, const double* kappa, sdp_sampler method, sdp_rng* rng,
                               size_t count, double* out, uint64_t* proposals) {
  return guard([&] {
    const auto params = read_params(d, p, g, kappa);
    if (count > 0) need(out, "out");
    SamplerMethod m;
    switch (method) {
      case SDP_SAMPLER_HAAR_REJECTION: m = SamplerMethod::kHaarRejection; break;
      case SDP_SAMPLER_COLUMN_REJECTION: m = SamplerMethod::kColumnRejection; break;
      case SDP_SAMPLER_AUTO: m = SamplerMethod::kAuto; break;
      default: throw Error(ErrorCode::kInvalidArgument, "unknown sampler");
    }
    Rng& r = rng_of(rng);
    std::uint64_t total = 0;
    const std::size_t stride = static_cast<std::size_t>(d) * static_cast<std::size_t>(p);
    for (size_t i = 0; i < count; ++i) {
      const LangevinDraw draw = sample(params, r, m);
      write_frame(draw.x, out + i * stride);
      total += draw.proposals;
    }
    if (proposals) *proposals = total;
  });
}

sdp_status sdp_langevin_mean(int d, int p, const double* g, const double* kappa, double* mean_out,
                             int* near_uniform) {
  return guard([&] {
    need(mean_out, "mean");
    const LangevinMean m = mean(read_params(d, p, g, kappa));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < p; ++j) mean_out[static_cast<std::size_t>(i) * p + j] = m.mean(i, j);
    if (near_uniform) *near_uniform = m.near_uniform ? 1 : 0;
  });
}

sdp_status sdp_dataset_load(const char* path, sdp_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sdp_dataset{parse_frames_csv(std::string(path))};
  });
}

sdp_status sdp_dataset_from_frames(size_t n, int d, int p, const double* frames, sdp_dataset** out) {
  return guard([&] {
    check_shape(d, p);
    need(out, "out");
    if (n > 0) need(frames, "frames");
    Dataset ds;
    ds.d = d;
    ds.p = p;
    const std::size_t stride = static_cast<std::size_t>(d) * static_cast<std::size_t>(p);
    for (size_t i = 0; i < n; ++i) {
      ds.frames.push_back(StiefelPoint::from_row_major(d, p, frames + i * stride));
      ds.ids.push_back(std::to_string(i + 1));
    }
    *out = new sdp_dataset{std::move(ds)};
  });
}

sdp_status sdp_dataset_convert_orbits(const char* path, sdp_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sdp_dataset{convert_orbits_csv(std::string(path))};
  });
}

sdp_status sdp_dataset_synthetic(uint64_t seed, sdp_dataset** out) {
  return guard([&] {
    need(out, "out");
    *out = new sdp_dataset{synthetic_neo_standin(seed)};
  });
}

sdp_status sdp_dataset_save(const sdp_dataset* ds, const char* path) {
  return guard([&] {
    need(ds, "dataset");
    need(path, "path");
    write_frames_csv(std::string(path), ds->data);
  });
}

sdp_status sdp_dataset_info(const sdp_dataset* ds, size_t* n, int* d, int* p, size_t* reprojected) {
  return guard([&] {
    need(ds, "dataset");
    if (n) *n = ds->data.size();
    if (d) *d = ds->data.d;
    if (p) *p = ds->data.p;
    if (reprojected) *reprojected = ds->data.reprojected;
  });
}

sdp_status sdp_dataset_frame(const sdp_dataset* ds, size_t index, double* out) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    if (index >= ds->data.size()) throw Error(ErrorCode::kInvalidArgument, "frame index out of range");
    write_frame(ds->data.frames[index], out);
  });
}

void sdp_dataset_destroy(sdp_dataset* ds) { delete ds; }

sdp_status sdp_orbital_frame(double inclination, double lon_ascending_node, double arg_perihelion, double* out) {
  return guard([&] {
    need(out, "out");
    write_frame(orbital_elements_to_frame(inclination, lon_ascending_node, arg_perihelion), out);
  });
}

sdp_status sdp_config_default(sdp_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new sdp_config{parse_run_config_text("")};
  });
}

sdp_status sdp_config_load(const char* path, sdp_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sdp_config{load_run_config(std::string(path))};
  });
}

sdp_status sdp_config_parse(const char* text, sdp_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new sdp_config{parse_run_config_text(std::string(text))};
  });
}

sdp_status sdp_config_set_seed(sdp_config* cfg, uint64_t seed) {
  return guard([&] {
    need(cfg, "config");
    cfg->config.seed = seed;
    cfg->config.chain.seed = seed;
  });
}

sdp_status sdp_config_set_iterations(sdp_config* cfg, int iters, int burn_in, int thin) {
  return guard([&] {
    need(cfg, "config");
    RunConfig next = cfg->config;
    next.chain.iters = iters;
    next.chain.burn_in = burn_in;
    next.chain.thin = thin;
    next.validate();
    cfg->config = next;
  });
}

sdp_status sdp_config_get_iterations(const sdp_config* cfg, int* iters, int* burn_in, int* thin) {
  return guard([&] {
    need(cfg, "config");
    if (iters) *iters = cfg->config.chain.iters;
    if (burn_in) *burn_in = cfg->config.chain.burn_in;
    if (thin) *thin = cfg->config.chain.thin;
  });
}

sdp_status sdp_config_render(const sdp_config* cfg, char* buf, size_t capacity, size_t* needed) {
  return guard([&] {
    need(cfg, "config");
    const std::string text = render_run_config(cfg->config);
    if (needed) *needed = text.size() + 1;
    if (buf && capacity > 0) {
      const std::size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void sdp_config_destroy(sdp_config* cfg) { delete cfg; }

sdp_status sdp_fit(const sdp_dataset* ds, const sdp_config* cfg, sdp_chain** out) {
  return guard([&] {
    need(ds, "dataset");
    need(cfg, "config");
    need(out, "out");
    if (!cfg->config.seed) throw Error(ErrorCode::kInvalidArgument, "a seed is required (config key 'seed' or --seed)");
    ChainConfig cc = cfg->config.chain;
    cc.seed = *cfg->config.seed;
    *out = new sdp_chain{run_chain(ds->data.frames, cfg->config.prior, cc), cfg->config};
  });
}

sdp_status sdp_chain_write(const sdp_chain* chain, const char* outdir) {
  return guard([&] {
    need(chain, "chain");
    need(outdir, "outdir");
    write_chain_files(chain->chain, chain->config, std::string(outdir));
  });
}

sdp_status sdp_chain_load(const char* rundir, sdp_chain** out) {
  return guard([&] {
    need(rundir, "rundir");
    need(out, "out");
    ChainOutput c = load_chain(std::string(rundir));
    RunConfig rc;
    rc.prior = c.prior;
    rc.chain = c.config;
    rc.seed = c.seed;
    *out = new sdp_chain{std::move(c), std::move(rc)};
  });
}

sdp_status sdp_chain_info(const sdp_chain* chain, size_t* retained, int* n, int* d, int* p) {
  return guard([&] {
    need(chain, "chain");
    if (retained) *retained = chain->chain.states.size();
    if (n) *n = chain->chain.n;
    if (d) *d = chain->chain.d;
    if (p) *p = chain->chain.p;
  });
}

sdp_status sdp_chain_summarize(const sdp_chain* chain, const sdp_dataset* ds, const char* outdir, size_t haar_grid,
                               size_t sphere_grid) {
  return guard([&] {
    need(chain, "chain");
    need(ds, "dataset");
    need(outdir, "outdir");
    SummaryOptions opt;
    opt.haar_grid = haar_grid;
    opt.sphere_grid = sphere_grid;
    emit_summaries(chain->chain, ds->data, std::string(outdir), opt);
  });
}

sdp_status sdp_chain_log_predictive(const sdp_chain* chain, const double* x, double* out) {
  return guard([&] {
    need(chain, "chain");
    need(out, "out");
    *out = log_predictive(read_frame(x, chain->chain.d, chain->chain.p, "x"), chain->chain);
  });
}

sdp_status sdp_chain_modal_clusters(const sdp_chain* chain, int min_size, int* out) {
  return guard([&] {
    need(chain, "chain");
    need(out, "out");
    *out = modal_cluster_count(chain->chain, min_size);
  });
}

void sdp_chain_destroy(sdp_chain* chain) { delete chain; }

sdp_status sdp_phi(const double* kappa, int p, double* out) {
  return guard([&] {
    need(out, "out");
    *out = phi(read_kappa(kappa, p));
  });
}

sdp_status sdp_log_log_slope(const double* x, const double* y, size_t n, double* out) {
  return guard([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    *out = log_log_slope(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
  });
}

sdp_status sdp_hellinger_langevin(int d, int p, const double* g1, const double* kappa1, const double* g2,
                                  const double* kappa2, size_t n_samples, sdp_rng* rng, double* estimate,
                                  double* std_error) {
  return guard([&] {
    need(estimate, "estimate");
    need(std_error, "std_error");
    const auto f = DensityHandle::langevin(read_params(d, p, g1, kappa1));
    const auto g = DensityHandle::langevin(read_params(d, p, g2, kappa2));
    // balanced mixture proposal covers the bulk of both densities
    const auto q = DensityHandle::mixture({f, g}, {0.5, 0.5});
    const auto r = hellinger_mc(f, g, n_samples, rng_of(rng), &q);
    *estimate = r.estimate;
    *std_error = r.std_error;
  });
}

sdp_status sdp_kl_langevin(int d, int p, const double* g0, const double* kappa0, const double* g,
                           const double* kappa, size_t n_samples, sdp_rng* rng, double* estimate, double* std_error) {
  return guard([&] {
    need(estimate, "estimate");
    need(std_error, "std_error");
    const auto f0 = DensityHandle::langevin(read_params(d, p, g0, kappa0));
    const auto f = DensityHandle::langevin(read_params(d, p, g, kappa));
    const auto r = kl_mc(f0, f, n_samples, rng_of(rng), &f0);
    *estimate = r.estimate;
    *std_error = r.std_error;
  });
}

sdp_status sdp_kernel_approx_langevin(int d, int p, const double* g, const double* kappa_f,
                                      const double* kappa_kernel, size_t n_outer, size_t n_inner, sdp_rng* rng,
                                      double* error, double* max_inner_se) {
  return guard([&] {
    need(error, "error");
    const auto f = DensityHandle::langevin(read_params(d, p, g, kappa_f));
    const auto r = kernel_approx_error(f, read_kappa(kappa_kernel, p), n_outer, n_inner, rng_of(rng));
    *error = r.error;
    if (max_inner_se) *max_inner_se = r.max_inner_se;
  });
}

sdp_status sdp_lipschitz_location(int d, int p, const double* kappa, size_t trials, sdp_rng* rng, double* out) {
  return guard([&] {
    check_shape(d, p);
    need(out, "out");
    *out = lipschitz_ratio_location(d, read_kappa(kappa, p), trials, rng_of(rng));
  });
}

sdp_status sdp_lipschitz_concentration(int d, int p, double k_bound, size_t trials, sdp_rng* rng, double* out) {
  return guard([&] {
    check_shape(d, p);
    need(out, "out");
    *out = lipschitz_ratio_concentration(d, p, k_bound, trials, rng_of(rng));
  });
}

sdp_status sdp_tail_check(const char* prior_type, const double* params, size_t n_params, int d, int p, double a,
                          double beta, const long* n_grid, size_t n_count, size_t draws, sdp_rng* rng, double* mass,
                          double* bound, int* pass) {
  return guard([&] {
    need(prior_type, "prior_type");
    if (n_params > 0) need(params, "params");
    if (n_count > 0) need(n_grid, "n_grid");
    const std::string type(prior_type);
    auto arity = [&](size_t k) {
      if (n_params != k) throw Error(ErrorCode::kInvalidArgument, type + " prior takes " + std::to_string(k) + " parameter(s)");
    };
    KappaPrior prior;
    if (type == "truncated-exponential") {
      arity(2);
      prior = KappaPrior::truncated_exponential(params[0], params[1]);
    } else if (type == "weibull") {
      arity(2);
      prior = KappaPrior::weibull(params[0], params[1]);
    } else if (type == "gamma") {
      arity(2);
      prior = KappaPrior::gamma(params[0], params[1]);
    } else if (type == "point-mass") {
      arity(1);
      prior = KappaPrior::point_mass(params[0]);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown prior type '" + type + "'");
    }
    const auto res = tail_condition_check(prior, d, p, a, beta, std::vector<long>(n_grid, n_grid + n_count),
                                          rng_of(rng), draws);
    for (size_t i = 0; i < res.size(); ++i) {
      if (mass) mass[i] = res[i].mass;
      if (bound) bound[i] = res[i].bound;
      if (pass) pass[i] = res[i].pass ? 1 : 0;
    }
  });
}

}  // extern "C"
