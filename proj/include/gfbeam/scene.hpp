#ifndef GFBEAM_SCENE_HPP
#define GFBEAM_SCENE_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfbeam/geometry.hpp"

namespace gfb {

struct MicrophoneArray {
  std::vector<Vec3> positions;  // one entry per microphone, meters

  std::size_t size() const { return positions.size(); }
};

// Planar focus grid. Point (i, j) = origin + i*spacing*axis1 + j*spacing*axis2,
// i in [0, nu), j in [0, nv); linear index n = j*nu + i (rows along axis1).
struct FocusGrid {
  Vec3 origin;
  Vec3 axis1;
  Vec3 axis2;
  double extent_u = 0.0;  // m along axis1
  double extent_v = 0.0;  // m along axis2
  double spacing = 0.0;
  std::vector<std::uint8_t> mask;  // empty = all points active

  std::size_t nu = 0;
  std::size_t nv = 0;

  std::size_t size() const { return nu * nv; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nu + i; }
  Vec3 point(std::size_t linear_index) const;
  Vec3 point(std::size_t i, std::size_t j) const;
  bool active(std::size_t linear_index) const {
    return mask.empty() || mask[linear_index] != 0;
  }
  // Nearest grid index to an arbitrary point (projection onto the grid plane,
  // rounded and clamped per axis).
  std::size_t nearest_index(const Vec3& p) const;
};

struct Panel {
  Vec3 corner;
  Vec3 edge1;
  Vec3 edge2;
  double reflection = 1.0;  // in [0, 1]

  Vec3 unit_normal() const { return normalized(cross(edge1, edge2)); }
  Vec3 mirror(const Vec3& p) const;
  // Distance from p to the panel's (infinite) plane.
  double plane_distance(const Vec3& p) const;
};

using ReflectorSet = std::vector<Panel>;

struct SceneSource {
  Vec3 position;
  std::complex<double> amplitude{1.0, 0.0};
};

struct Scene {
  MicrophoneArray array;
  FocusGrid grid;
  ReflectorSet reflectors;
  double speed_of_sound = 343.0;
  std::vector<SceneSource> sources;
};

enum class DiagnosticSeverity { kError, kWarning };

struct Diagnostic {
  std::string code;
  DiagnosticSeverity severity;
  std::string message;
};

// Concentric ring layout: ring i has counts[i] microphones equally spaced on a
// circle of diameter diameters[i] in the plane z = plane_offsets[i], first
// microphone at angle 0 on +x.
MicrophoneArray build_ring_array(const std::vector<double>& diameters,
                                 const std::vector<int>& counts,
                                 const std::vector<double>& plane_offsets);

FocusGrid build_focus_grid(const Vec3& origin, const Vec3& axis1, const Vec3& axis2,
                           double extent_u, double extent_v, double spacing);

// Empty result iff every type invariant holds. Off-grid sources produce a
// SOURCE_OFF_GRID warning (metrics snap them to the nearest grid point).
std::vector<Diagnostic> validate_scene(const Scene& scene);

// JSON config loaders; key schema is documented in the README.
Scene scene_from_json_file(const std::string& path);
Scene scene_from_json_text(const std::string& text);

}  // namespace gfb

#endif
