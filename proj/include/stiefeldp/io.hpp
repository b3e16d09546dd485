#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stiefeldp/manifold.hpp"

namespace stiefeldp {

struct Dataset {
  int d = 0;
  int p = 0;
  std::vector<StiefelPoint> frames;
  std::vector<std::string> ids;  // one per frame, possibly empty strings
  std::size_t reprojected = 0;   // rows that needed re-orthonormalization

  std::size_t size() const noexcept { return frames.size(); }
};

// Rows with deviation above this are rejected as data-quality failures.
inline constexpr double kRejectDeviation = 1e-3;

// CSV with header `d,p,id,x11,x12,...` (row-major), one frame per row.
// Frames that are not orthonormal to StiefelPoint::kTolerance are projected
// onto the manifold; deviations above kRejectDeviation raise DataQualityError
// listing every offending line.
Dataset parse_frames_csv(std::istream& in);
Dataset parse_frames_csv(const std::string& path);

void write_frames_csv(std::ostream& out, const Dataset& data);
void write_frames_csv(const std::string& path, const Dataset& data);

// Columns (perihelion direction, in-plane orthogonal direction) of
// R_z(node) R_x(inclination) R_z(arg_perihelion). Angles in radians.
StiefelPoint orbital_elements_to_frame(double inclination, double lon_ascending_node, double arg_perihelion);

// CSV with header `id,inclination,lon_ascending_node,arg_perihelion`, angles in degrees.
Dataset convert_orbits_csv(std::istream& in);
Dataset convert_orbits_csv(const std::string& path);

// Stand-in for the near-Earth-object orbit set: 162 frames on V_{3,2} drawn
// from a fixed three-component matrix Langevin mixture.
Dataset synthetic_neo_standin(std::uint64_t seed);

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double x);

}  // namespace stiefeldp
