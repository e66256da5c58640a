#ifndef GFBEAM_BEAMFORM_HPP
#define GFBEAM_BEAMFORM_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "gfbeam/csm.hpp"
#include "gfbeam/steering.hpp"

namespace gfb {

// Beamformer output A(y) = w^H C w over the focus grid at one frequency,
// linear power units.
struct SourceMap {
  double frequency = 0.0;
  std::vector<double> values;
  std::shared_ptr<const FocusGrid> grid;
  SteeringParams params;
  std::string gf_provenance;
};

// Power ratio between Eq.-1-style time-domain output (4*pi*r weights over
// physical 1/(4*pi*r) spreading) and the unit-GF frequency-domain map.
inline constexpr double td_fd_power_ratio = (4.0 * pi) * (4.0 * pi);

// Real part of w^H C w per focus point; asserts the imaginary residue is
// below 1e-10 relative. Frequencies must match within bin_spacing/2.
SourceMap dirty_map(const Csm& csm, std::size_t csm_freq_index, const SteeringSet& steering,
                    std::size_t steer_freq_index, std::shared_ptr<const FocusGrid> grid);

// |w(y)^H g(y_s)|^2 per focus point, one map per tensor frequency. Equals
// dirty_map(synthetic_csm(tensor, source, 1), ...) entrywise.
std::vector<SourceMap> psf_map(const GfTensor& tensor, std::size_t source_index,
                               const SteeringSet& steering,
                               std::shared_ptr<const FocusGrid> grid);

enum class Interpolation { kNearest, kLinear, kSinc };

// Per-focus-point delay-and-sum time series, (1/M) sum_m 4*pi*r_m *
// p_m(t + r_m/c), focus-major storage.
struct TdOutput {
  double sample_rate = 0.0;
  std::size_t n_focus = 0;
  std::size_t n_samples = 0;
  std::vector<double> data;

  std::span<const double> series(std::size_t n) const {
    return {data.data() + n * n_samples, n_samples};
  }
};

TdOutput td_beamform(const TimeRecord& record, const Scene& scene,
                     Interpolation interpolation);

// Single focus point variant.
std::vector<double> td_beamform_point(const TimeRecord& record, const MicrophoneArray& array,
                                      const Vec3& focus, double speed_of_sound,
                                      Interpolation interpolation);

struct TdSpectrum {
  std::vector<double> frequencies;
  std::size_t n_focus = 0;
  std::vector<double> values;  // (focus, freq) row-major auto-powers

  double at(std::size_t focus, std::size_t qi) const {
    return values[focus * frequencies.size() + qi];
  }
};

// One-channel Welch auto-spectrum of each focus series.
TdSpectrum td_spectrum(const TdOutput& output, const WelchParams& params);

// Map exports: CSV columns x,y,value_linear,value_db with x,y the grid-plane
// offsets from the origin, and the binary "MAP1" stacked format (magic,
// u32 n_freq/n_focus, f64 frequencies, f64 values per frequency).
void export_map_csv(const std::string& path, const SourceMap& map);
void export_maps_binary(const std::string& path, const std::vector<SourceMap>& maps);

}  // namespace gfb

#endif
