#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "stiefeldp/mixture.hpp"

namespace stiefeldp {

/// Everything a fit needs besides the data. Parsed from a flat TOML-style
/// file: `key = value` lines, optional `[kappa_prior]` and `[alpha_prior]`
/// tables, `#` comments. Unknown keys are errors.
struct RunConfig {
  PriorSpec prior;
  ChainConfig chain;
  std::optional<std::uint64_t> seed;  // a fit refuses to run without one

  void validate() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Canonical text with every resolved value; parses back to the same config.
std::string render_run_config(const RunConfig& config);

std::string variant_name(Variant v);
std::string kappa_prior_name(KappaPrior::Kind k);

}  // namespace stiefeldp
