#pragma once

#include <cstdint>
#include <string>

#include "stiefeldp/config.hpp"
#include "stiefeldp/io.hpp"
#include "stiefeldp/mixture.hpp"

namespace stiefeldp {

struct SummaryOptions {
  std::size_t haar_grid = 200;    // Haar frames for the joint predictive
  std::size_t sphere_grid = 400;  // directions per column marginal
  std::uint64_t grid_seed = 0;
  std::size_t max_states = 200;   // states used for column marginals
  bool svg = true;
};

// chain_states.csv, params_samples.csv, acceptance.csv and config_echo.toml.
void write_chain_files(const ChainOutput& chain, const RunConfig& config, const std::string& outdir);

// Rebuilds a chain from the files written above.
ChainOutput load_chain(const std::string& rundir);

// coclustering.csv, cluster_counts.csv, predictive_grid.csv, summary.txt and
// optionally coclustering.svg. Rows follow dataset order.
void emit_summaries(const ChainOutput& chain, const Dataset& data, const std::string& outdir,
                    const SummaryOptions& options = {});

// Smallest most frequent value of the min_size histogram.
int modal_cluster_count(const ChainOutput& chain, int min_size);

std::string coclustering_svg(const Eigen::MatrixXi& counts, std::size_t retained);

}  // namespace stiefeldp
