#include "stiefeldp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stiefeldp/error.hpp"
#include "stiefeldp/io.hpp"

namespace stiefeldp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drop a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::string raw;
  std::size_t line;
};

double as_double(const Value& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), out);
  if (ec != std::errc() || ptr != v.raw.data() + v.raw.size() || !std::isfinite(out))
    throw ParseError(v.line, "expected a number, found '" + v.raw + "'");
  return out;
}

long long as_int(const Value& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), out);
  if (ec != std::errc() || ptr != v.raw.data() + v.raw.size())
    throw ParseError(v.line, "expected an integer, found '" + v.raw + "'");
  return out;
}

std::string as_string(const Value& v) {
  if (v.raw.size() >= 2 && v.raw.front() == '"' && v.raw.back() == '"') return v.raw.substr(1, v.raw.size() - 2);
  throw ParseError(v.line, "expected a quoted string, found '" + v.raw + "'");
}

std::vector<double> as_array(const Value& v) {
  if (v.raw.size() < 2 || v.raw.front() != '[' || v.raw.back() != ']')
    throw ParseError(v.line, "expected an array, found '" + v.raw + "'");
  std::vector<double> out;
  std::istringstream ss(v.raw.substr(1, v.raw.size() - 2));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    out.push_back(as_double({cell, v.line}));
  }
  return out;
}

}  // namespace

std::string variant_name(Variant v) {
  return v == Variant::kLocationOnly ? "location-only" : "location-scale";
}

std::string kappa_prior_name(KappaPrior::Kind k) {
  switch (k) {
    case KappaPrior::Kind::kTruncatedExponential: return "truncated-exponential";
    case KappaPrior::Kind::kWeibull: return "weibull";
    case KappaPrior::Kind::kGamma: return "gamma";
    case KappaPrior::Kind::kPointMass: return "point-mass";
  }
  return "?";
}

void RunConfig::validate() const {
  if (!(chain.burn_in >= 0 && chain.iters > chain.burn_in))
    throw Error(ErrorCode::kInvalidArgument, "config: need iters > burn_in >= 0");
  if (chain.thin < 1) throw Error(ErrorCode::kInvalidArgument, "config: thin must be >= 1");
  if (chain.m_aux < 1) throw Error(ErrorCode::kInvalidArgument, "config: m_aux must be >= 1");
  if (!(chain.steps.g >= 0.0) || !(chain.steps.kappa >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "config: step sizes must be >= 0");
  if (chain.hypergeom.truncation_order < 1)
    throw Error(ErrorCode::kInvalidArgument, "config: truncation_order must be >= 1");
  if (!(prior.alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "config: alpha must be > 0");
  prior.kappa_prior.validate();
}

RunConfig parse_run_config(std::istream& in) {
  // section -> key -> value
  std::map<std::string, std::map<std::string, Value>> entries;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "unterminated table header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "kappa_prior" && section != "alpha_prior") throw ParseError(lineno, "unknown table [" + section + "]");
      if (entries.count(section)) throw ParseError(lineno, "duplicate table [" + section + "]");
      entries[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(lineno, "expected key = value");
    auto& table = entries[section];
    if (table.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    table.emplace(key, Value{value, lineno});
  }

  RunConfig cfg;
  cfg.prior.kappa_prior = KappaPrior::truncated_exponential(0.1, 5.0);
  for (const auto& [key, v] : entries[""]) {
    if (key == "variant") {
      const std::string name = as_string(v);
      if (name == "location-scale") cfg.prior.variant = Variant::kLocationScale;
      else if (name == "location-only") cfg.prior.variant = Variant::kLocationOnly;
      else throw ParseError(v.line, "variant must be \"location-scale\" or \"location-only\"");
    } else if (key == "alpha") {
      cfg.prior.alpha = as_double(v);
    } else if (key == "iters") {
      cfg.chain.iters = static_cast<int>(as_int(v));
    } else if (key == "burn_in") {
      cfg.chain.burn_in = static_cast<int>(as_int(v));
    } else if (key == "thin") {
      cfg.chain.thin = static_cast<int>(as_int(v));
    } else if (key == "m_aux") {
      cfg.chain.m_aux = static_cast<int>(as_int(v));
    } else if (key == "step_g") {
      cfg.chain.steps.g = as_double(v);
    } else if (key == "step_kappa") {
      cfg.chain.steps.kappa = as_double(v);
    } else if (key == "truncation_order") {
      cfg.chain.hypergeom.truncation_order = static_cast<int>(as_int(v));
    } else if (key == "seed") {
      const long long s = as_int(v);
      if (s < 0) throw ParseError(v.line, "seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else {
      throw ParseError(v.line, "unknown key '" + key + "'");
    }
  }

  if (entries.count("kappa_prior")) {
    const auto& t = entries["kappa_prior"];
    auto need = [&](const char* k) -> const Value& {
      const auto it = t.find(k);
      if (it == t.end()) throw Error(ErrorCode::kParse, std::string("[kappa_prior] needs '") + k + "'");
      return it->second;
    };
    for (const auto& [key, v] : t)
      if (key != "type" && key != "params" && key != "lower") throw ParseError(v.line, "unknown key '" + key + "'");
    const Value& type_v = need("type");
    const std::string type = as_string(type_v);
    const auto params = t.count("params") ? as_array(t.at("params")) : std::vector<double>{};
    auto arity = [&](std::size_t n) {
      if (params.size() != n)
        throw ParseError(type_v.line, type + " prior takes " + std::to_string(n) + " parameter(s)");
    };
    try {
      if (type == "truncated-exponential" || type == "exponential") {
        arity(1);
        const double lower = t.count("lower") ? as_double(t.at("lower")) : 5.0;
        cfg.prior.kappa_prior = KappaPrior::truncated_exponential(params[0], lower);
      } else if (type == "weibull") {
        arity(2);
        cfg.prior.kappa_prior = KappaPrior::weibull(params[0], params[1]);
      } else if (type == "gamma") {
        arity(2);
        cfg.prior.kappa_prior = KappaPrior::gamma(params[0], params[1]);
      } else if (type == "point-mass") {
        arity(1);
        cfg.prior.kappa_prior = KappaPrior::point_mass(params[0]);
      } else {
        throw ParseError(type_v.line, "unknown kappa prior type '" + type + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(type_v.line, e.what());
    }
    if (t.count("lower") && cfg.prior.kappa_prior.kind != KappaPrior::Kind::kTruncatedExponential)
      throw ParseError(t.at("lower").line, "'lower' only applies to the truncated exponential");
  }

  if (entries.count("alpha_prior")) {
    AlphaHyperprior h;
    for (const auto& [key, v] : entries["alpha_prior"]) {
      if (key == "shape") h.shape = as_double(v);
      else if (key == "rate") h.rate = as_double(v);
      else throw ParseError(v.line, "unknown key '" + key + "'");
    }
    cfg.prior.alpha_prior = h;
  }

  if (cfg.seed) cfg.chain.seed = *cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return parse_run_config(in);
}

std::string render_run_config(const RunConfig& c) {
  std::ostringstream o;
  o << "variant = \"" << variant_name(c.prior.variant) << "\"\n";
  o << "alpha = " << format_double(c.prior.alpha) << '\n';
  o << "iters = " << c.chain.iters << '\n';
  o << "burn_in = " << c.chain.burn_in << '\n';
  o << "thin = " << c.chain.thin << '\n';
  o << "m_aux = " << c.chain.m_aux << '\n';
  o << "step_g = " << format_double(c.chain.steps.g) << '\n';
  o << "step_kappa = " << format_double(c.chain.steps.kappa) << '\n';
  o << "truncation_order = " << c.chain.hypergeom.truncation_order << '\n';
  if (c.seed) o << "seed = " << *c.seed << '\n';
  const auto& k = c.prior.kappa_prior;
  o << "\n[kappa_prior]\ntype = \"" << kappa_prior_name(k.kind) << "\"\n";
  switch (k.kind) {
    case KappaPrior::Kind::kTruncatedExponential:
      o << "params = [" << format_double(k.rate) << "]\nlower = " << format_double(k.lower) << '\n';
      break;
    case KappaPrior::Kind::kWeibull:
    case KappaPrior::Kind::kGamma:
      o << "params = [" << format_double(k.shape) << ", " << format_double(k.rate) << "]\n";
      break;
    case KappaPrior::Kind::kPointMass: o << "params = [" << format_double(k.point) << "]\n"; break;
  }
  if (c.prior.alpha_prior) {
    o << "\n[alpha_prior]\nshape = " << format_double(c.prior.alpha_prior->shape)
      << "\nrate = " << format_double(c.prior.alpha_prior->rate) << '\n';
  }
  return o.str();
}

}  // namespace stiefeldp
