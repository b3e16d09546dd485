#include "stiefeldp/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stiefeldp/error.hpp"

namespace stiefeldp {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create output directory " + dir);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size())
      throw ParseError(lineno, path.filename().string() + ": expected " + std::to_string(header.size()) + " fields");
    rows.push_back(std::move(cells));
  }
  if (header.empty()) throw ParseError(1, path.filename().string() + ": empty file");
  return rows;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad number '" + s + "'");
  }
}

long to_long(const std::string& s) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad integer '" + s + "'");
  }
}

// Fibonacci lattice on S^2; random directions elsewhere.
std::vector<Vector> sphere_grid(int d, std::size_t m, Rng& rng) {
  std::vector<Vector> out;
  out.reserve(m);
  if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < m; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(m);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vector v(3);
      v << r * std::cos(golden * i), r * std::sin(golden * i), z;
      out.push_back(v);
    }
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    Vector v(d);
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
    out.push_back(v / v.norm());
  }
  return out;
}

}  // namespace

void write_chain_files(const ChainOutput& chain, const RunConfig& config, const std::string& outdir) {
  ensure_dir(outdir);
  const fs::path dir(outdir);
  {
    std::ostringstream o;
    o << "sweep,alpha,log_joint";
    for (int i = 1; i <= chain.n; ++i) o << ",z" << i;
    o << '\n';
    for (std::size_t s = 0; s < chain.states.size(); ++s) {
      const auto& st = chain.states[s];
      o << st.sweep_index << ',' << format_double(st.alpha) << ',' << format_double(chain.log_joint[s]);
      for (int a : st.assignments) o << ',' << a;
      o << '\n';
    }
    write_file(dir / "chain_states.csv", o.str());
  }
  {
    std::ostringstream o;
    o << "sweep,cluster,size";
    for (int j = 1; j <= chain.p; ++j) o << ",kappa" << j;
    for (int i = 1; i <= chain.d; ++i)
      for (int j = 1; j <= chain.p; ++j) o << ",g" << i << '_' << j;
    o << '\n';
    for (const auto& st : chain.states) {
      const auto sizes = st.sizes();
      for (int c = 0; c < st.num_clusters(); ++c) {
        o << st.sweep_index << ',' << c << ',' << sizes[static_cast<std::size_t>(c)];
        const auto& k = st.kappa(c);
        for (int j = 0; j < chain.p; ++j) o << ',' << format_double(k[j]);
        for (double v : st.locations[static_cast<std::size_t>(c)].row_major()) o << ',' << format_double(v);
        o << '\n';
      }
    }
    write_file(dir / "params_samples.csv", o.str());
  }
  {
    const auto& a = chain.acceptance;
    std::ostringstream o;
    o << "move,proposed,accepted,rate\n";
    o << "location," << a.g_proposed << ',' << a.g_accepted << ',' << format_double(a.g_rate()) << '\n';
    o << "concentration," << a.kappa_proposed << ',' << a.kappa_accepted << ',' << format_double(a.kappa_rate())
      << '\n';
    write_file(dir / "acceptance.csv", o.str());
  }
  RunConfig echo = config;
  echo.seed = chain.seed;
  write_file(dir / "config_echo.toml", render_run_config(echo));
}

ChainOutput load_chain(const std::string& rundir) {
  const fs::path dir(rundir);
  const RunConfig cfg = load_run_config((dir / "config_echo.toml").string());
  ChainOutput out;
  out.prior = cfg.prior;
  out.config = cfg.chain;
  out.seed = cfg.seed.value_or(0);
  out.config.seed = out.seed;
  const bool shared = cfg.prior.variant == Variant::kLocationOnly;

  std::vector<std::string> sh;
  const auto srows = read_csv(dir / "chain_states.csv", sh);
  if (sh.size() < 3) throw Error(ErrorCode::kParse, "chain_states.csv: malformed header");
  out.n = static_cast<int>(sh.size()) - 3;

  std::vector<std::string> ph;
  const auto prows = read_csv(dir / "params_samples.csv", ph);
  int p = 0;
  while (3 + p < static_cast<int>(ph.size()) && ph[3 + p].rfind("kappa", 0) == 0) ++p;
  const int dp = static_cast<int>(ph.size()) - 3 - p;
  if (p < 1 || dp % p != 0) throw Error(ErrorCode::kParse, "params_samples.csv: malformed header");
  out.p = p;
  out.d = dp / p;

  std::size_t prow = 0;
  for (const auto& r : srows) {
    MixtureState st;
    st.sweep_index = to_long(r[0]);
    st.alpha = to_double(r[1]);
    out.log_joint.push_back(to_double(r[2]));
    for (int i = 0; i < out.n; ++i) st.assignments.push_back(static_cast<int>(to_long(r[3 + static_cast<std::size_t>(i)])));
    while (prow < prows.size() && to_long(prows[prow][0]) == st.sweep_index) {
      const auto& q = prows[prow++];
      if (to_long(q[1]) != st.num_clusters()) throw Error(ErrorCode::kParse, "params_samples.csv: clusters out of order");
      Vector k(p);
      for (int j = 0; j < p; ++j) k(j) = to_double(q[3 + static_cast<std::size_t>(j)]);
      std::vector<double> g(static_cast<std::size_t>(dp));
      for (int j = 0; j < dp; ++j) g[static_cast<std::size_t>(j)] = to_double(q[3 + static_cast<std::size_t>(p + j)]);
      Concentration kappa(k);
      st.log_normalizers.push_back(log_0f1(0.5 * out.d, kappa, out.config.hypergeom));
      st.locations.push_back(StiefelPoint::from_row_major(out.d, p, g.data()));
      if (shared) st.shared_kappa = kappa;
      else st.kappas.push_back(kappa);
    }
    st.check_invariants(static_cast<std::size_t>(out.n));
    out.states.push_back(std::move(st));
  }
  if (prow != prows.size()) throw Error(ErrorCode::kParse, "params_samples.csv: rows do not match chain_states.csv");

  std::vector<std::string> ah;
  const auto arows = read_csv(dir / "acceptance.csv", ah);
  for (const auto& r : arows) {
    if (r[0] == "location") {
      out.acceptance.g_proposed = static_cast<std::uint64_t>(to_long(r[1]));
      out.acceptance.g_accepted = static_cast<std::uint64_t>(to_long(r[2]));
    } else if (r[0] == "concentration") {
      out.acceptance.kappa_proposed = static_cast<std::uint64_t>(to_long(r[1]));
      out.acceptance.kappa_accepted = static_cast<std::uint64_t>(to_long(r[2]));
    }
  }
  return out;
}

int modal_cluster_count(const ChainOutput& chain, int min_size) {
  const auto h = cluster_count_histogram(chain, min_size);
  int best = 0;
  std::size_t freq = 0;
  for (const auto& [k, f] : h)
    if (f > freq) {
      best = k;
      freq = f;
    }
  return best;
}

std::string coclustering_svg(const Eigen::MatrixXi& counts, std::size_t retained) {
  const auto n = counts.rows();
  constexpr int kCell = 4;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n * kCell << "\" height=\"" << n * kCell << "\">\n";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double f = retained ? static_cast<double>(counts(i, j)) / static_cast<double>(retained) : 0.0;
      const int shade = 255 - static_cast<int>(std::lround(255.0 * std::clamp(f, 0.0, 1.0)));
      o << "<rect x=\"" << j * kCell << "\" y=\"" << i * kCell << "\" width=\"" << kCell << "\" height=\"" << kCell
        << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade << ")\"/>\n";
    }
  o << "</svg>\n";
  return o.str();
}

void emit_summaries(const ChainOutput& chain, const Dataset& data, const std::string& outdir,
                    const SummaryOptions& options) {
  if (chain.states.empty()) throw Error(ErrorCode::kInvalidArgument, "chain has no retained states");
  if (static_cast<int>(data.size()) != chain.n || data.d != chain.d || data.p != chain.p)
    throw Error(ErrorCode::kInvalidShape, "dataset does not match the chain");
  ensure_dir(outdir);
  const fs::path dir(outdir);

  const Eigen::MatrixXi co = coclustering_matrix(chain);
  {
    std::ostringstream o;
    for (Eigen::Index i = 0; i < co.rows(); ++i) {
      for (Eigen::Index j = 0; j < co.cols(); ++j) o << (j ? "," : "") << co(i, j);
      o << '\n';
    }
    write_file(dir / "coclustering.csv", o.str());
  }
  if (options.svg) write_file(dir / "coclustering.svg", coclustering_svg(co, chain.states.size()));

  const int min_sizes[] = {1, 5, 10};
  {
    std::ostringstream o;
    o << "min_size,num_clusters,frequency\n";
    for (int m : min_sizes)
      for (const auto& [k, f] : cluster_count_histogram(chain, m)) o << m << ',' << k << ',' << f << '\n';
    write_file(dir / "cluster_counts.csv", o.str());
  }

  {
    Rng rng(options.grid_seed);
    std::ostringstream o;
    o << "kind,column,index";
    for (int k = 1; k <= chain.d * chain.p; ++k) o << ",v" << k;
    o << ",log_predictive\n";
    for (std::size_t i = 0; i < options.haar_grid; ++i) {
      const StiefelPoint x = sample_haar(chain.d, chain.p, rng);
      o << "frame,," << i;
      for (double v : x.row_major()) o << ',' << format_double(v);
      o << ',' << format_double(log_predictive(x, chain)) << '\n';
    }
    const auto dirs = sphere_grid(chain.d, options.sphere_grid, rng);
    for (int c = 0; c < chain.p; ++c)
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        o << "column," << c + 1 << ',' << i;
        for (int k = 0; k < chain.d * chain.p; ++k) {
          o << ',';
          if (k < chain.d) o << format_double(dirs[i](k));
        }
        o << ',' << format_double(log_predictive_column(dirs[i], c, chain, options.max_states)) << '\n';
      }
    write_file(dir / "predictive_grid.csv", o.str());
  }

  {
    const MixtureState& last = chain.states.back();
    std::vector<int> sizes = last.sizes();
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    const auto it = std::max_element(chain.log_joint.begin(), chain.log_joint.end());
    std::ostringstream o;
    o << "n = " << chain.n << "\nd = " << chain.d << "\np = " << chain.p << "\nseed = " << chain.seed
      << "\nretained_states = " << chain.states.size() << '\n';
    for (int m : min_sizes) o << "modal_clusters_min" << m << " = " << modal_cluster_count(chain, m) << '\n';
    o << "last_state_cluster_sizes =";
    for (int s : sizes) o << ' ' << s;
    o << "\nmap_sweep = " << chain.states[static_cast<std::size_t>(it - chain.log_joint.begin())].sweep_index
      << "\nmap_log_joint = " << format_double(*it) << "\nacceptance_location = "
      << format_double(chain.acceptance.g_rate()) << "\nacceptance_concentration = "
      << format_double(chain.acceptance.kappa_rate()) << '\n';
    write_file(dir / "summary.txt", o.str());
  }
}

}  // namespace stiefeldp
