#ifndef GFBEAM_METRICS_HPP
#define GFBEAM_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gfbeam/beamform.hpp"

namespace gfb {

enum CriteriaFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagDegenerate = 1u << 0,      // all-equal map, argmax tie-broken
  kFlagNonpositiveSource = 1u << 1,  // map value at y_s is <= 0
  kFlagContourClipped = 1u << 2,  // -1 dB component touches the grid boundary
  kFlagMsrNotFound = 1u << 3,     // no side lobe down to L_max - 60 dB
  kFlagSourceMasked = 1u << 4,    // snapped source cell excluded by the mask
};

std::vector<std::string> flag_names(std::uint32_t flags);

// The five map-quality criteria of one map against one true source position.
struct MapCriteria {
  double frequency = 0.0;
  double spatial_deviation = 0.0;  // m
  double level_error = 0.0;        // dB
  double resolution_b = 0.0;       // m
  double msr = 0.0;                // dB
  double spr = 0.0;                // dB
  std::uint32_t flags = kFlagNone;
};

// ||y_max - y_s||, argmax over active cells, ties to the lowest linear index.
double spatial_deviation(const SourceMap& map, const Vec3& source_position,
                         std::uint32_t* flags = nullptr);

// 10*log10(A(y_s)) - 10*log10(true_power); y_s snaps to the nearest grid cell.
double level_error(const SourceMap& map, const Vec3& source_position, double true_power,
                   std::uint32_t* flags = nullptr);

// b = 2 * max distance from y_max to any cell of the 8-connected component
// around y_max whose level is >= L_max - 1 dB.
double resolution(const SourceMap& map, std::uint32_t* flags = nullptr);

// Threshold descends from L_max in step_db decrements; once the component
// containing the source cell exists, the first other component defines the
// highest side lobe (its max cell). MSR = L_s - L_SL, which can be negative
// when the source sits below other lobes. Search floor: L_max - 60 dB.
double msr(const SourceMap& map, const Vec3& source_position, double step_db = 0.1,
           std::uint32_t* flags = nullptr);

// 10*log10(A(y_s) / mean over masked cells), source cell included in the mean.
// An empty mask argument falls back to the map's grid mask.
double spr(const SourceMap& map, const Vec3& source_position,
           const std::vector<std::uint8_t>& mask = {}, std::uint32_t* flags = nullptr);

MapCriteria evaluate_criteria(const SourceMap& map, const Vec3& source_position,
                              double true_power, double msr_step_db = 0.1);

// Arithmetic mean per criterion per frequency across source positions;
// flagged values are excluded from the affected criterion's mean.
struct AggregateCriteria {
  double frequency = 0.0;
  double spatial_deviation = 0.0;
  double level_error = 0.0;
  double resolution_b = 0.0;
  double msr = 0.0;
  double spr = 0.0;
  std::size_t flag_count = 0;  // criteria entries carrying any flag
};

std::vector<AggregateCriteria> aggregate(
    const std::vector<std::vector<MapCriteria>>& per_source);

}  // namespace gfb

#endif
