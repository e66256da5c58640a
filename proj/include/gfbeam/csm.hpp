#ifndef GFBEAM_CSM_HPP
#define GFBEAM_CSM_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gfbeam/greens.hpp"

namespace gfb {

struct TimeRecord {
  double sample_rate = 0.0;
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  std::vector<double> data;  // channel-major, Pa

  std::span<const double> channel(std::size_t m) const {
    return {data.data() + m * n_samples, n_samples};
  }
  std::span<double> channel(std::size_t m) {
    return {data.data() + m * n_samples, n_samples};
  }
};

enum class Window { kHann, kRect };
enum class Normalization { kAmplitudeCorrected, kNone };

struct WelchParams {
  std::size_t block_len = 4096;  // K
  double overlap = 0.5;          // fraction in [0, 1)
  Window window = Window::kHann;
  Normalization normalization = Normalization::kAmplitudeCorrected;

  // Block hop in samples; floor keeps the paper's N = 298 for K = 4809, r = 0.5.
  std::size_t hop() const;
  std::size_t n_blocks(std::size_t n_samples) const;
};

// Per-frequency M x M Hermitian cross-spectral matrices, freq-major row-major.
struct Csm {
  std::vector<double> frequencies;
  std::size_t n_mics = 0;
  double bin_spacing = 0.0;  // Hz; 0 for synthetic CSMs
  std::vector<std::complex<double>> matrices;

  std::size_t n_freq() const { return frequencies.size(); }
  std::span<const std::complex<double>> matrix(std::size_t qi) const {
    return {matrices.data() + qi * n_mics * n_mics, n_mics * n_mics};
  }
  std::span<std::complex<double>> matrix(std::size_t qi) {
    return {matrices.data() + qi * n_mics * n_mics, n_mics * n_mics};
  }
};

// One-sided amplitude at an exact DFT bin: (2/K) sum_k p_k e^{-2*pi*i*f*k*dt}.
std::complex<double> dft_block(std::span<const double> block, double sample_rate,
                               double f_bin);

// Welch average of 0.5 * p_m p_n^H over overlapping windowed blocks, all bins
// j = 0..floor(K/2). Hann coherent gain (mean of the window) is divided out
// when normalization is amplitude-corrected.
Csm welch_csm(const TimeRecord& record, const WelchParams& params);

// Same, restricted to the bins nearest the requested frequencies; a request
// farther than bin_spacing/2 from any bin raises FREQ_MISMATCH.
Csm welch_csm(const TimeRecord& record, const WelchParams& params,
              const std::vector<double>& frequencies);

// C(f) = |a|^2 g(y_s) g(y_s)^H from the tensor column at the source point.
Csm synthetic_csm(const GfTensor& tensor, std::size_t source_focus_index,
                  std::complex<double> amplitude);

// Main diagonal zeroed per frequency. Hermitian is preserved; the PSD
// invariant is intentionally waived for this output.
Csm remove_diagonal(const Csm& csm);

// Ascending eigenvalues of the Hermitian matrix at one frequency.
std::vector<double> hermitian_eigenvalues(const Csm& csm, std::size_t qi);

// Binary "CSM1" sibling of the GF format: magic, u32 n_freq/M,
// f64 frequencies, interleaved complex row-major matrices.
void export_csm_file(const std::string& path, const Csm& csm);

}  // namespace gfb

#endif
