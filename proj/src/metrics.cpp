/*
 * Map-quality criteria: spatial deviation, level error, -1 dB resolution,
 * main-to-side-lobe ratio and source-to-pattern ratio, plus aggregation
 * across source positions. All thresholds/contours work in dB on an
 * 8-connected planar grid; map values stay linear.
 */
#include "gfbeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"

namespace gfb {

std::vector<std::string> flag_names(std::uint32_t flags) {
  std::vector<std::string> names;
  if (flags & kFlagDegenerate) names.emplace_back("DEGENERATE");
  if (flags & kFlagNonpositiveSource) names.emplace_back("NONPOSITIVE_SOURCE");
  if (flags & kFlagContourClipped) names.emplace_back("CONTOUR_CLIPPED");
  if (flags & kFlagMsrNotFound) names.emplace_back("MSR_NOT_FOUND");
  if (flags & kFlagSourceMasked) names.emplace_back("SOURCE_MASKED");
  return names;
}

namespace {

const FocusGrid& grid_of(const SourceMap& map) {
  if (!map.grid) throw Error(ErrorCode::kConfig, "map has no grid reference");
  if (map.grid->size() != map.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "map size does not match its grid");
  }
  return *map.grid;
}

// Argmax over active cells, ties to the lowest linear index.
std::size_t argmax_cell(const SourceMap& map, bool* degenerate) {
  const FocusGrid& grid = grid_of(map);
  std::size_t best = map.values.size();
  bool all_equal = true;
  double first = 0.0;
  bool have_first = false;
  for (std::size_t n = 0; n < map.values.size(); ++n) {
    if (!grid.active(n)) continue;
    if (!have_first) {
      first = map.values[n];
      have_first = true;
    } else if (map.values[n] != first) {
      all_equal = false;
    }
    if (best == map.values.size() || map.values[n] > map.values[best]) best = n;
  }
  if (best == map.values.size()) throw Error(ErrorCode::kConfig, "map has no active cells");
  if (degenerate) *degenerate = all_equal && map.values.size() > 1;
  return best;
}

// Component of cells with level >= threshold_db grown from seed, 8-connected.
std::vector<std::size_t> component_from(const SourceMap& map, const FocusGrid& grid,
                                        std::size_t seed, double threshold_db,
                                        std::vector<std::uint8_t>& visited) {
  std::vector<std::size_t> cells;
  std::queue<std::size_t> queue;
  queue.push(seed);
  visited[seed] = 1;
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop();
    cells.push_back(n);
    const long i = static_cast<long>(n % grid.nu);
    const long j = static_cast<long>(n / grid.nu);
    for (long dj = -1; dj <= 1; ++dj) {
      for (long di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const long ii = i + di;
        const long jj = j + dj;
        if (ii < 0 || jj < 0 || ii >= static_cast<long>(grid.nu) ||
            jj >= static_cast<long>(grid.nv)) {
          continue;
        }
        const std::size_t nn = grid.index(static_cast<std::size_t>(ii),
                                          static_cast<std::size_t>(jj));
        if (visited[nn] || !grid.active(nn)) continue;
        if (to_db(map.values[nn]) < threshold_db) continue;
        visited[nn] = 1;
        queue.push(nn);
      }
    }
  }
  return cells;
}

std::size_t snapped_source_cell(const SourceMap& map, const Vec3& source_position,
                                std::uint32_t* flags) {
  const FocusGrid& grid = grid_of(map);
  const std::size_t cell = grid.nearest_index(source_position);
  if (!grid.active(cell) && flags) *flags |= kFlagSourceMasked;
  return cell;
}

}  // namespace

double spatial_deviation(const SourceMap& map, const Vec3& source_position,
                         std::uint32_t* flags) {
  bool degenerate = false;
  const std::size_t best = argmax_cell(map, &degenerate);
  if (degenerate && flags) *flags |= kFlagDegenerate;
  return distance(grid_of(map).point(best), source_position);
}

double level_error(const SourceMap& map, const Vec3& source_position, double true_power,
                   std::uint32_t* flags) {
  const std::size_t cell = snapped_source_cell(map, source_position, flags);
  const double value = map.values[cell];
  if (value <= 0.0) {
    if (flags) *flags |= kFlagNonpositiveSource;
    return -std::numeric_limits<double>::infinity();
  }
  return to_db(value) - to_db(true_power);
}

double resolution(const SourceMap& map, std::uint32_t* flags) {
  const FocusGrid& grid = grid_of(map);
  const std::size_t best = argmax_cell(map, nullptr);
  const double threshold_db = to_db(map.values[best]) - 1.0;
  std::vector<std::uint8_t> visited(map.values.size(), 0);
  const auto cells = component_from(map, grid, best, threshold_db, visited);

  const Vec3 peak = grid.point(best);
  double max_dist = 0.0;
  bool clipped = false;
  for (std::size_t n : cells) {
    max_dist = std::max(max_dist, distance(peak, grid.point(n)));
    const std::size_t i = n % grid.nu;
    const std::size_t j = n / grid.nu;
    if (i == 0 || j == 0 || i + 1 == grid.nu || j + 1 == grid.nv) clipped = true;
  }
  if (clipped && flags) *flags |= kFlagContourClipped;
  return 2.0 * max_dist;
}

double msr(const SourceMap& map, const Vec3& source_position, double step_db,
           std::uint32_t* flags) {
  if (step_db <= 0.0) throw Error(ErrorCode::kConfig, "msr step must be > 0");
  const FocusGrid& grid = grid_of(map);
  const std::size_t best = argmax_cell(map, nullptr);
  const double level_max = to_db(map.values[best]);
  const std::size_t source_cell = snapped_source_cell(map, source_position, flags);
  const double level_source = to_db(map.values[source_cell]);

  // Threshold descends until the component holding the source cell exists;
  // the first other component then carries the highest side lobe.
  for (double threshold = level_max - step_db; threshold >= level_max - 60.0;
       threshold -= step_db) {
    if (level_source < threshold) continue;
    std::vector<std::uint8_t> visited(map.values.size(), 0);
    component_from(map, grid, source_cell, threshold, visited);
    double side_lobe = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < map.values.size(); ++n) {
      if (visited[n] || !grid.active(n)) continue;
      const double level = to_db(map.values[n]);
      if (level >= threshold) side_lobe = std::max(side_lobe, level);
    }
    if (std::isfinite(side_lobe)) return level_source - side_lobe;
  }
  if (flags) *flags |= kFlagMsrNotFound;
  return 60.0;
}

double spr(const SourceMap& map, const Vec3& source_position,
           const std::vector<std::uint8_t>& mask, std::uint32_t* flags) {
  const FocusGrid& grid = grid_of(map);
  if (!mask.empty() && mask.size() != map.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "mask length does not match the map");
  }
  auto masked = [&](std::size_t n) { return mask.empty() ? grid.active(n) : mask[n] != 0; };

  const std::size_t cell = grid.nearest_index(source_position);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < map.values.size(); ++n) {
    if (!masked(n)) continue;
    sum += map.values[n];
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kConfig, "empty mask");
  if (!masked(cell) && flags) *flags |= kFlagSourceMasked;
  const double value = map.values[cell];
  if (value <= 0.0) {
    if (flags) *flags |= kFlagNonpositiveSource;
    return -std::numeric_limits<double>::infinity();
  }
  return to_db(value) - to_db(sum / static_cast<double>(count));
}

MapCriteria evaluate_criteria(const SourceMap& map, const Vec3& source_position,
                              double true_power, double msr_step_db) {
  MapCriteria out;
  out.frequency = map.frequency;
  out.spatial_deviation = spatial_deviation(map, source_position, &out.flags);
  out.level_error = level_error(map, source_position, true_power, &out.flags);
  out.resolution_b = resolution(map, &out.flags);
  out.msr = msr(map, source_position, msr_step_db, &out.flags);
  out.spr = spr(map, source_position, {}, &out.flags);
  return out;
}

namespace {

constexpr std::uint32_t kExcludesSpatial = kFlagDegenerate;
constexpr std::uint32_t kExcludesLevel = kFlagNonpositiveSource | kFlagSourceMasked;
constexpr std::uint32_t kExcludesResolution = kFlagContourClipped;
constexpr std::uint32_t kExcludesMsr =
    kFlagMsrNotFound | kFlagNonpositiveSource | kFlagSourceMasked;
constexpr std::uint32_t kExcludesSpr = kFlagNonpositiveSource | kFlagSourceMasked;

struct MeanAccumulator {
  double sum = 0.0;
  std::size_t count = 0;
  void add(double value) {
    if (!std::isfinite(value)) return;  // undefined entries stay out of means
    sum += value;
    ++count;
  }
  double mean() const {
    return count > 0 ? sum / static_cast<double>(count)
                     : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace

std::vector<AggregateCriteria> aggregate(
    const std::vector<std::vector<MapCriteria>>& per_source) {
  if (per_source.empty()) return {};
  const std::size_t n_freq = per_source[0].size();
  for (const auto& source : per_source) {
    if (source.size() != n_freq) {
      throw Error(ErrorCode::kDimensionMismatch, "criteria lists differ in length");
    }
    for (std::size_t q = 0; q < n_freq; ++q) {
      if (source[q].frequency != per_source[0][q].frequency) {
        throw Error(ErrorCode::kDimensionMismatch, "criteria frequency axes differ");
      }
    }
  }

  std::vector<AggregateCriteria> out(n_freq);
  for (std::size_t q = 0; q < n_freq; ++q) {
    AggregateCriteria& agg = out[q];
    agg.frequency = per_source[0][q].frequency;
    MeanAccumulator dev, lvl, res, msr_acc, spr_acc;
    for (const auto& source : per_source) {
      const MapCriteria& c = source[q];
      if (c.flags != kFlagNone) ++agg.flag_count;
      if (!(c.flags & kExcludesSpatial)) dev.add(c.spatial_deviation);
      if (!(c.flags & kExcludesLevel)) lvl.add(c.level_error);
      if (!(c.flags & kExcludesResolution)) res.add(c.resolution_b);
      if (!(c.flags & kExcludesMsr)) msr_acc.add(c.msr);
      if (!(c.flags & kExcludesSpr)) spr_acc.add(c.spr);
    }
    agg.spatial_deviation = dev.mean();
    agg.level_error = lvl.mean();
    agg.resolution_b = res.mean();
    agg.msr = msr_acc.mean();
    agg.spr = spr_acc.mean();
  }
  return out;
}

}  // namespace gfb
