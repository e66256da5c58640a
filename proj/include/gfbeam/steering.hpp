#ifndef GFBEAM_STEERING_HPP
#define GFBEAM_STEERING_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfbeam/greens.hpp"

namespace gfb {

enum class SteeringPreset { kI, kII, kIII, kIV };

// (alpha, beta) parameterization of the amplitude scale function
//   f_m = |g_m|^(beta-1) / ((sum_n |g_n|^beta)^alpha * M^(1-alpha)).
// Presets pin the classic formulations: I=(0,1), II=(1,0), III=(1,2), IV=(1/2,1).
struct SteeringParams {
  double alpha = 0.0;
  double beta = 1.0;
  std::optional<SteeringPreset> preset;

  static SteeringParams from_preset(SteeringPreset p);
  std::string label() const;
};

struct SteeringSet {
  std::vector<double> frequencies;
  std::size_t n_focus = 0;
  std::size_t n_mics = 0;
  std::vector<std::complex<double>> weights;  // (freq, focus, mic) row-major
  SteeringParams params;
  std::string gf_provenance;

  std::size_t n_freq() const { return frequencies.size(); }
  std::span<const std::complex<double>> row(std::size_t qi, std::size_t ni) const {
    return {weights.data() + (qi * n_focus + ni) * n_mics, n_mics};
  }
};

// f_m per the generalized formula; requires |g_m| > 0 for every entry.
std::vector<double> scale_function(std::span<const std::complex<double>> g_row,
                                   double alpha, double beta);

// w_m = f_m * g_m / |g_m| (scale times the unit-magnitude phase of g).
std::vector<std::complex<double>> steering_vector(
    std::span<const std::complex<double>> g_row, const SteeringParams& params);

SteeringSet build_steering(const GfTensor& tensor, const SteeringParams& params);

// PSF value |w(y)^H g(y_s)|^2 for a single focus/source pair of one frequency.
double psf_value(std::span<const std::complex<double>> g_focus,
                 std::span<const std::complex<double>> g_source,
                 const SteeringParams& params);

// Norm of the central-difference PSF gradient at the source, per frequency.
// fd_step must be a positive integer multiple of the grid spacing; neighbours
// are taken on the grid, so the source must lie in the grid interior.
// Vanishes (to O(h^2) truncation) iff alpha = 1 - 1/beta.
std::vector<double> check_local_max_condition(const GfTensor& tensor, const FocusGrid& grid,
                                              std::size_t source_index,
                                              const SteeringParams& params, double fd_step);

// A(y_s, y_s) = (sum_m f_m |g_m|)^2 per frequency; equals 1 iff alpha = 1
// (and, degenerately, for any alpha when beta = 0).
std::vector<double> check_amplitude_condition(const GfTensor& tensor,
                                              std::size_t source_index,
                                              const SteeringParams& params);

}  // namespace gfb

#endif
