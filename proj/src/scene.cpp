#include "gfbeam/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gfbeam/errors.hpp"
#include "json.hpp"

namespace gfb {

namespace {

// Guard against 1.44/0.01 landing just below an integer.
std::size_t grid_points(double extent, double spacing) {
  return static_cast<std::size_t>(std::floor(extent / spacing + 1e-9)) + 1;
}

}  // namespace

Vec3 FocusGrid::point(std::size_t i, std::size_t j) const {
  return origin + (static_cast<double>(i) * spacing) * axis1 +
         (static_cast<double>(j) * spacing) * axis2;
}

Vec3 FocusGrid::point(std::size_t linear_index) const {
  return point(linear_index % nu, linear_index / nu);
}

std::size_t FocusGrid::nearest_index(const Vec3& p) const {
  const Vec3 rel = p - origin;
  const double u = dot(rel, axis1);
  const double v = dot(rel, axis2);
  auto clamp_round = [](double w, double spacing, std::size_t count) {
    long idx = std::lround(w / spacing);
    idx = std::max(0l, std::min(idx, static_cast<long>(count) - 1));
    return static_cast<std::size_t>(idx);
  };
  return index(clamp_round(u, spacing, nu), clamp_round(v, spacing, nv));
}

Vec3 Panel::mirror(const Vec3& p) const {
  const Vec3 n = unit_normal();
  const double d = dot(n, p - corner);
  return p - (2.0 * d) * n;
}

double Panel::plane_distance(const Vec3& p) const {
  return std::abs(dot(unit_normal(), p - corner));
}

MicrophoneArray build_ring_array(const std::vector<double>& diameters,
                                 const std::vector<int>& counts,
                                 const std::vector<double>& plane_offsets) {
  if (diameters.size() != counts.size() || diameters.size() != plane_offsets.size()) {
    throw Error(ErrorCode::kConfig, "ring list lengths differ");
  }
  MicrophoneArray array;
  for (std::size_t r = 0; r < diameters.size(); ++r) {
    if (diameters[r] <= 0.0) throw Error(ErrorCode::kConfig, "nonpositive ring diameter");
    if (counts[r] < 1) throw Error(ErrorCode::kConfig, "ring count must be >= 1");
    const double radius = 0.5 * diameters[r];
    const int count = counts[r];
    for (int m = 0; m < count; ++m) {
      const double angle = 2.0 * pi * static_cast<double>(m) / static_cast<double>(count);
      array.positions.push_back(
          {radius * std::cos(angle), radius * std::sin(angle), plane_offsets[r]});
    }
  }
  return array;
}

FocusGrid build_focus_grid(const Vec3& origin, const Vec3& axis1, const Vec3& axis2,
                           double extent_u, double extent_v, double spacing) {
  if (spacing <= 0.0) throw Error(ErrorCode::kConfig, "grid spacing must be > 0");
  if (extent_u < 0.0 || extent_v < 0.0) {
    throw Error(ErrorCode::kConfig, "grid extent must be >= 0");
  }
  FocusGrid grid;
  grid.origin = origin;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  grid.extent_u = extent_u;
  grid.extent_v = extent_v;
  grid.spacing = spacing;
  grid.nu = grid_points(extent_u, spacing);
  grid.nv = grid_points(extent_v, spacing);
  return grid;
}

std::vector<Diagnostic> validate_scene(const Scene& scene) {
  std::vector<Diagnostic> out;
  auto error = [&out](const std::string& code, const std::string& msg) {
    out.push_back({code, DiagnosticSeverity::kError, msg});
  };
  auto warning = [&out](const std::string& code, const std::string& msg) {
    out.push_back({code, DiagnosticSeverity::kWarning, msg});
  };

  const auto& mics = scene.array.positions;
  if (mics.empty()) error("EMPTY_ARRAY", "microphone array has no microphones");
  for (std::size_t a = 0; a < mics.size(); ++a) {
    for (std::size_t b = a + 1; b < mics.size(); ++b) {
      if (distance(mics[a], mics[b]) <= 1e-9) {
        std::ostringstream msg;
        msg << "microphones " << a << " and " << b << " coincide";
        error("DUPLICATE_MIC", msg.str());
      }
    }
  }

  const FocusGrid& grid = scene.grid;
  if (grid.spacing <= 0.0) error("BAD_SPACING", "grid spacing must be > 0");
  if (std::abs(norm(grid.axis1) - 1.0) > 1e-12 || std::abs(norm(grid.axis2) - 1.0) > 1e-12 ||
      std::abs(dot(grid.axis1, grid.axis2)) > 1e-12) {
    error("AXES_NOT_ORTHONORMAL", "grid axes must be orthonormal to 1e-12");
  }
  if (!grid.mask.empty() && grid.mask.size() != grid.size()) {
    error("MASK_SIZE", "grid mask length does not match point count");
  }

  for (std::size_t p = 0; p < scene.reflectors.size(); ++p) {
    const Panel& panel = scene.reflectors[p];
    std::ostringstream which;
    which << "panel " << p;
    if (norm(cross(panel.edge1, panel.edge2)) <= 0.0) {
      error("REFLECTOR_ZERO_AREA", which.str() + " has zero area");
      continue;
    }
    if (std::abs(dot(panel.edge1, panel.edge2)) >
        1e-12 * norm(panel.edge1) * norm(panel.edge2)) {
      error("REFLECTOR_EDGES_NOT_ORTHOGONAL", which.str() + " edges are not orthogonal");
    }
    if (panel.reflection < 0.0 || panel.reflection > 1.0) {
      error("BAD_REFLECTION_COEFF", which.str() + " coefficient outside [0, 1]");
    }
  }

  if (scene.speed_of_sound <= 0.0) error("NONPOSITIVE_C", "speed of sound must be > 0");

  if (grid.spacing > 0.0) {
    for (std::size_t s = 0; s < scene.sources.size(); ++s) {
      const Vec3 pos = scene.sources[s].position;
      const double off = distance(pos, grid.point(grid.nearest_index(pos)));
      if (off > 1e-9) {
        std::ostringstream msg;
        msg << "source " << s << " is " << off
            << " m from the nearest grid point; metrics snap it";
        warning("SOURCE_OFF_GRID", msg.str());
      }
    }
  }

  return out;
}

namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw Error(ErrorCode::kConfig, std::string("expected 3-element array for '") + key + "'");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

}  // namespace

Scene scene_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("scene config parse: ") + e.what());
  }

  Scene scene;
  scene.speed_of_sound = j.value("speed_of_sound", 343.0);

  if (!j.contains("array") || !j["array"].contains("rings")) {
    throw Error(ErrorCode::kConfig, "scene config needs array.rings");
  }
  std::vector<double> diameters, offsets;
  std::vector<int> counts;
  for (const auto& ring : j["array"]["rings"]) {
    diameters.push_back(ring.at("diameter").get<double>());
    counts.push_back(ring.at("count").get<int>());
    offsets.push_back(ring.value("z", 0.0));
  }
  scene.array = build_ring_array(diameters, counts, offsets);

  if (!j.contains("grid")) throw Error(ErrorCode::kConfig, "scene config needs grid");
  const json& g = j["grid"];
  const Vec3 origin = vec3_from(g, "origin");
  const Vec3 axis1 = g.contains("axis1") ? vec3_from(g, "axis1") : Vec3{1, 0, 0};
  const Vec3 axis2 = g.contains("axis2") ? vec3_from(g, "axis2") : Vec3{0, 1, 0};
  if (!g.contains("extent") || g["extent"].size() != 2) {
    throw Error(ErrorCode::kConfig, "grid.extent must be [width, height]");
  }
  scene.grid = build_focus_grid(origin, axis1, axis2, g["extent"][0].get<double>(),
                                g["extent"][1].get<double>(), g.at("spacing").get<double>());

  for (const auto& r : j.value("reflectors", json::array())) {
    Panel panel;
    panel.corner = vec3_from(r, "corner");
    panel.edge1 = vec3_from(r, "edge1");
    panel.edge2 = vec3_from(r, "edge2");
    panel.reflection = r.value("reflection", 1.0);
    scene.reflectors.push_back(panel);
  }

  for (const auto& s : j.value("sources", json::array())) {
    SceneSource source;
    source.position = vec3_from(s, "position");
    if (s.contains("amplitude")) {
      if (s["amplitude"].is_array() && s["amplitude"].size() == 2) {
        source.amplitude = {s["amplitude"][0].get<double>(), s["amplitude"][1].get<double>()};
      } else {
        source.amplitude = {s["amplitude"].get<double>(), 0.0};
      }
    }
    scene.sources.push_back(source);
  }

  return scene;
}

Scene scene_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scene config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scene_from_json_text(buffer.str());
}

}  // namespace gfb
