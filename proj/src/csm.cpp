/*
 * Cross-spectral matrix estimation: Welch-averaged block spectra of measured
 * records and synthetic rank-1 CSMs from Green's-function tensors.
 */
#include "gfbeam/csm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>
#include <fftw3.h>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"

namespace gfb {

namespace {

// Shared r2c plans keyed by block length. FFTW planning is not thread safe;
// execution on caller-owned buffers is.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan plan(std::size_t n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(n, p);
    return p;
  }

 private:
  FftPlanCache() = default;
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

void run_r2c(std::size_t n, double* in, std::complex<double>* out) {
  fftw_plan p = FftPlanCache::instance().plan(n);
  fftw_execute_dft_r2c(p, in, reinterpret_cast<fftw_complex*>(out));
}

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::kHann) {
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(n)));
    }
  }
  return w;
}

double coherent_gain(std::span<const double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  return sum / static_cast<double>(w.size());
}

std::size_t bin_of(double f, double bin_spacing, std::size_t n_bins) {
  const double ratio = f / bin_spacing;
  const long j = std::lround(ratio);
  if (j < 0 || static_cast<std::size_t>(j) >= n_bins ||
      std::abs(ratio - static_cast<double>(j)) > 1e-6) {
    std::ostringstream msg;
    msg << f << " Hz is not a DFT bin (spacing " << bin_spacing << " Hz)";
    throw Error(ErrorCode::kNotABin, msg.str());
  }
  return static_cast<std::size_t>(j);
}

}  // namespace

std::size_t WelchParams::hop() const {
  const auto h = static_cast<std::size_t>(
      std::floor(static_cast<double>(block_len) * (1.0 - overlap)));
  return std::max<std::size_t>(1, h);
}

std::size_t WelchParams::n_blocks(std::size_t n_samples) const {
  if (n_samples < block_len) return 0;
  return (n_samples - block_len) / hop() + 1;
}

std::complex<double> dft_block(std::span<const double> block, double sample_rate,
                               double f_bin) {
  const std::size_t k = block.size();
  if (k < 2) throw Error(ErrorCode::kTooShort, "block must have at least 2 samples");
  const std::size_t n_bins = k / 2 + 1;
  const std::size_t j = bin_of(f_bin, sample_rate / static_cast<double>(k), n_bins);
  std::vector<double> in(block.begin(), block.end());
  std::vector<std::complex<double>> out(n_bins);
  run_r2c(k, in.data(), out.data());
  return (2.0 / static_cast<double>(k)) * out[j];
}

namespace {

Csm welch_csm_impl(const TimeRecord& record, const WelchParams& params,
                   const std::vector<std::size_t>& bins, double bin_spacing) {
  const std::size_t k = params.block_len;
  const std::size_t n_blocks = params.n_blocks(record.n_samples);
  if (n_blocks == 0) {
    std::ostringstream msg;
    msg << "record of " << record.n_samples << " samples is shorter than one block of " << k;
    throw Error(ErrorCode::kTooShort, msg.str());
  }
  const std::size_t m_count = record.n_channels;
  const std::size_t n_sel = bins.size();

  const auto window = make_window(params.window, k);
  double scale = 2.0 / static_cast<double>(k);
  if (params.normalization == Normalization::kAmplitudeCorrected) {
    scale /= coherent_gain(window);
  }

  Csm csm;
  csm.n_mics = m_count;
  csm.bin_spacing = bin_spacing;
  csm.frequencies.resize(n_sel);
  for (std::size_t s = 0; s < n_sel; ++s) {
    csm.frequencies[s] = static_cast<double>(bins[s]) * bin_spacing;
  }
  csm.matrices.assign(n_sel * m_count * m_count, {0.0, 0.0});

  std::vector<double> buffer(k);
  std::vector<std::complex<double>> spectrum(k / 2 + 1);
  // amplitudes[s*m_count + m] for the current block
  std::vector<std::complex<double>> amplitudes(n_sel * m_count);

  const std::size_t hop = params.hop();
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t start = b * hop;
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto channel = record.channel(m);
      for (std::size_t i = 0; i < k; ++i) buffer[i] = channel[start + i] * window[i];
      run_r2c(k, buffer.data(), spectrum.data());
      for (std::size_t s = 0; s < n_sel; ++s) {
        amplitudes[s * m_count + m] = scale * spectrum[bins[s]];
      }
    }
    for (std::size_t s = 0; s < n_sel; ++s) {
      auto block_amp = amplitudes.data() + s * m_count;
      auto matrix = csm.matrix(s);
      for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t n = m; n < m_count; ++n) {
          matrix[m * m_count + n] += 0.5 * block_amp[m] * std::conj(block_amp[n]);
        }
      }
    }
  }

  const double inv_blocks = 1.0 / static_cast<double>(n_blocks);
  for (std::size_t s = 0; s < n_sel; ++s) {
    auto matrix = csm.matrix(s);
    for (std::size_t m = 0; m < m_count; ++m) {
      matrix[m * m_count + m] = {matrix[m * m_count + m].real() * inv_blocks, 0.0};
      for (std::size_t n = m + 1; n < m_count; ++n) {
        matrix[m * m_count + n] *= inv_blocks;
        matrix[n * m_count + m] = std::conj(matrix[m * m_count + n]);
      }
    }
  }
  return csm;
}

}  // namespace

Csm welch_csm(const TimeRecord& record, const WelchParams& params) {
  if (record.sample_rate <= 0.0) throw Error(ErrorCode::kConfig, "sample rate must be > 0");
  if (params.block_len < 2) throw Error(ErrorCode::kConfig, "block length must be >= 2");
  if (params.overlap < 0.0 || params.overlap >= 1.0) {
    throw Error(ErrorCode::kConfig, "overlap must be in [0, 1)");
  }
  const double bin_spacing = record.sample_rate / static_cast<double>(params.block_len);
  std::vector<std::size_t> bins(params.block_len / 2 + 1);
  for (std::size_t j = 0; j < bins.size(); ++j) bins[j] = j;
  return welch_csm_impl(record, params, bins, bin_spacing);
}

Csm welch_csm(const TimeRecord& record, const WelchParams& params,
              const std::vector<double>& frequencies) {
  if (record.sample_rate <= 0.0) throw Error(ErrorCode::kConfig, "sample rate must be > 0");
  const double bin_spacing = record.sample_rate / static_cast<double>(params.block_len);
  const std::size_t n_bins = params.block_len / 2 + 1;
  std::vector<std::size_t> bins;
  bins.reserve(frequencies.size());
  for (double f : frequencies) {
    const long j = std::lround(f / bin_spacing);
    if (j < 0 || static_cast<std::size_t>(j) >= n_bins ||
        std::abs(f - static_cast<double>(j) * bin_spacing) > 0.5 * bin_spacing) {
      std::ostringstream msg;
      msg << "no CSM bin within " << 0.5 * bin_spacing << " Hz of " << f << " Hz";
      throw Error(ErrorCode::kFreqMismatch, msg.str());
    }
    bins.push_back(static_cast<std::size_t>(j));
  }
  return welch_csm_impl(record, params, bins, bin_spacing);
}

Csm synthetic_csm(const GfTensor& tensor, std::size_t source_focus_index,
                  std::complex<double> amplitude) {
  if (source_focus_index >= tensor.n_focus) {
    throw Error(ErrorCode::kIndexRange, "source focus index outside the grid");
  }
  if (std::abs(amplitude) <= 0.0) {
    throw Error(ErrorCode::kConfig, "source amplitude must be nonzero");
  }
  const double power = std::norm(amplitude);
  const std::size_t m_count = tensor.n_mics;

  Csm csm;
  csm.frequencies = tensor.frequencies;
  csm.n_mics = m_count;
  csm.bin_spacing = 0.0;
  csm.matrices.resize(tensor.n_freq() * m_count * m_count);
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    const auto g = tensor.row(q, source_focus_index);
    auto matrix = csm.matrix(q);
    for (std::size_t m = 0; m < m_count; ++m) {
      matrix[m * m_count + m] = {power * std::norm(g[m]), 0.0};
      for (std::size_t n = m + 1; n < m_count; ++n) {
        matrix[m * m_count + n] = power * g[m] * std::conj(g[n]);
        matrix[n * m_count + m] = std::conj(matrix[m * m_count + n]);
      }
    }
  }
  return csm;
}

Csm remove_diagonal(const Csm& csm) {
  Csm out = csm;
  const std::size_t m_count = csm.n_mics;
  for (std::size_t q = 0; q < csm.n_freq(); ++q) {
    auto matrix = out.matrix(q);
    for (std::size_t m = 0; m < m_count; ++m) matrix[m * m_count + m] = {0.0, 0.0};
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const Csm& csm, std::size_t qi) {
  if (qi >= csm.n_freq()) throw Error(ErrorCode::kIndexRange, "frequency index out of range");
  const auto m = static_cast<Eigen::Index>(csm.n_mics);
  Eigen::MatrixXcd a(m, m);
  const auto matrix = csm.matrix(qi);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      a(r, c) = matrix[static_cast<std::size_t>(r) * csm.n_mics + static_cast<std::size_t>(c)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> values(csm.n_mics);
  for (Eigen::Index i = 0; i < m; ++i) values[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return values;
}

void export_csm_file(const std::string& path, const Csm& csm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const char magic[4] = {'C', 'S', 'M', '1'};
  out.write(magic, 4);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(csm.n_freq()),
                                 static_cast<std::uint32_t>(csm.n_mics)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(csm.frequencies.data()),
            static_cast<std::streamsize>(csm.frequencies.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(csm.matrices.data()),
            static_cast<std::streamsize>(csm.matrices.size() * sizeof(std::complex<double>)));
}

}  // namespace gfb
