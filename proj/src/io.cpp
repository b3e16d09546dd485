#include "stiefeldp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stiefeldp/error.hpp"
#include "stiefeldp/langevin.hpp"

namespace stiefeldp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

int parse_int(const std::string& s, std::size_t line, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

Dataset parse_frames_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  Dataset out;
  std::vector<std::size_t> bad_rows;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (!header) {
      if (cells.size() < 4 || cells[0] != "d" || cells[1] != "p" || cells[2] != "id")
        throw ParseError(lineno, "expected header d,p,id,x11,...");
      header = true;
      continue;
    }
    if (cells.size() < 3) throw ParseError(lineno, "too few fields");
    const int d = parse_int(cells[0], lineno, "d");
    const int p = parse_int(cells[1], lineno, "p");
    if (p < 1 || d < p) throw ParseError(lineno, "need 1 <= p <= d");
    if (out.frames.empty() && bad_rows.empty()) {
      out.d = d;
      out.p = p;
    } else if (d != out.d || p != out.p) {
      throw ParseError(lineno, "shape differs from earlier rows");
    }
    const std::size_t want = static_cast<std::size_t>(d) * static_cast<std::size_t>(p);
    if (cells.size() != 3 + want)
      throw ParseError(lineno, "expected " + std::to_string(want) + " values, found " + std::to_string(cells.size() - 3));
    values.resize(want);
    for (std::size_t k = 0; k < want; ++k)
      if (!parse_number(cells[3 + k], values[k])) throw ParseError(lineno, "bad number '" + cells[3 + k] + "'");
    Matrix m(d, p);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < p; ++j) m(i, j) = values[static_cast<std::size_t>(i) * p + j];
    const double dev = orthonormality_deviation(m);
    if (dev > kRejectDeviation) {
      bad_rows.push_back(lineno);
      continue;
    }
    if (dev > StiefelPoint::kTolerance) {
      out.frames.push_back(project(m));
      ++out.reprojected;
    } else {
      out.frames.emplace_back(std::move(m));
    }
    out.ids.push_back(cells[2]);
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  if (!bad_rows.empty()) {
    std::string list;
    for (auto r : bad_rows) list += (list.empty() ? "" : ", ") + std::to_string(r);
    throw DataQualityError(bad_rows, "orthonormality deviation above 1e-3 on line(s) " + list);
  }
  return out;
}

Dataset parse_frames_csv(const std::string& path) {
  auto in = open_in(path);
  return parse_frames_csv(in);
}

void write_frames_csv(std::ostream& out, const Dataset& data) {
  out << "d,p,id";
  for (int i = 1; i <= data.d; ++i)
    for (int j = 1; j <= data.p; ++j) out << ",x" << i << '_' << j;
  out << '\n';
  for (std::size_t r = 0; r < data.frames.size(); ++r) {
    out << data.d << ',' << data.p << ',' << (r < data.ids.size() ? data.ids[r] : std::string());
    for (double v : data.frames[r].row_major()) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_frames_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_frames_csv(out, data);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

StiefelPoint orbital_elements_to_frame(double inclination, double lon_ascending_node, double arg_perihelion) {
  if (!std::isfinite(inclination) || !std::isfinite(lon_ascending_node) || !std::isfinite(arg_perihelion))
    throw Error(ErrorCode::kInvalidArgument, "orbital angles must be finite");
  auto rz = [](double t) {
    Eigen::Matrix3d r;
    r << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
    return r;
  };
  Eigen::Matrix3d rx;
  const double ci = std::cos(inclination), si = std::sin(inclination);
  rx << 1, 0, 0, 0, ci, -si, 0, si, ci;
  const Eigen::Matrix3d r = rz(lon_ascending_node) * rx * rz(arg_perihelion);
  return project(r.leftCols(2));
}

Dataset convert_orbits_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  Dataset out;
  out.d = 3;
  out.p = 2;
  constexpr double kDeg = std::numbers::pi / 180.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (!header) {
      if (cells.size() != 4 || cells[0] != "id")
        throw ParseError(lineno, "expected header id,inclination,lon_ascending_node,arg_perihelion");
      header = true;
      continue;
    }
    if (cells.size() != 4) throw ParseError(lineno, "expected 4 fields");
    double a[3];
    for (int k = 0; k < 3; ++k)
      if (!parse_number(cells[1 + k], a[k])) throw ParseError(lineno, "bad angle '" + cells[1 + k] + "'");
    out.frames.push_back(orbital_elements_to_frame(a[0] * kDeg, a[1] * kDeg, a[2] * kDeg));
    out.ids.push_back(cells[0]);
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  return out;
}

Dataset convert_orbits_csv(const std::string& path) {
  auto in = open_in(path);
  return convert_orbits_csv(in);
}

Dataset synthetic_neo_standin(std::uint64_t seed) {
  // low-inclination prograde bulk, a tilted family, and a diffuse remainder
  struct Component {
    double incl, node, argp;
    double k1, k2;
    int count;
  };
  constexpr double kDeg = std::numbers::pi / 180.0;
  const Component comps[] = {
      {8.0, 100.0, 60.0, 25.0, 12.0, 70},
      {25.0, 250.0, 200.0, 18.0, 10.0, 55},
      {45.0, 10.0, 300.0, 6.0, 5.0, 37},
  };
  Rng rng(seed);
  Dataset out;
  out.d = 3;
  out.p = 2;
  for (const auto& c : comps) {
    const LangevinParams params(orbital_elements_to_frame(c.incl * kDeg, c.node * kDeg, c.argp * kDeg),
                                Concentration{c.k1, c.k2});
    for (int i = 0; i < c.count; ++i) {
      out.frames.push_back(sample(params, rng, SamplerMethod::kAuto).x);
      out.ids.push_back("syn" + std::to_string(out.frames.size()));
    }
  }
  return out;
}

}  // namespace stiefeldp
