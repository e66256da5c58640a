/*
 * Steering vectors from Green's functions via the generalized (alpha, beta)
 * scale-function family. Presets I-IV are fixed (alpha, beta) pairs; II uses
 * the closed form g_m / (M |g_m|^2) so beta = 0 needs no 0^0 convention.
 */
#include "gfbeam/steering.hpp"

#include <cmath>
#include <sstream>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"

namespace gfb {

SteeringParams SteeringParams::from_preset(SteeringPreset p) {
  SteeringParams params;
  params.preset = p;
  switch (p) {
    case SteeringPreset::kI: params.alpha = 0.0; params.beta = 1.0; break;
    case SteeringPreset::kII: params.alpha = 1.0; params.beta = 0.0; break;
    case SteeringPreset::kIII: params.alpha = 1.0; params.beta = 2.0; break;
    case SteeringPreset::kIV: params.alpha = 0.5; params.beta = 1.0; break;
  }
  return params;
}

std::string SteeringParams::label() const {
  if (preset) {
    switch (*preset) {
      case SteeringPreset::kI: return "I";
      case SteeringPreset::kII: return "II";
      case SteeringPreset::kIII: return "III";
      case SteeringPreset::kIV: return "IV";
    }
  }
  std::ostringstream out;
  out << "alpha" << alpha << "_beta" << beta;
  return out.str();
}

namespace {

void require_nonzero(std::span<const std::complex<double>> g_row) {
  for (std::size_t m = 0; m < g_row.size(); ++m) {
    if (std::abs(g_row[m]) <= 0.0) {
      throw Error(ErrorCode::kZeroGf,
                  "zero-magnitude Green's function entry at mic " + std::to_string(m));
    }
  }
}

bool is_formulation_ii(const SteeringParams& p) { return p.alpha == 1.0 && p.beta == 0.0; }

}  // namespace

std::vector<double> scale_function(std::span<const std::complex<double>> g_row,
                                   double alpha, double beta) {
  if (g_row.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty Green's function row");
  require_nonzero(g_row);
  const auto m_count = static_cast<double>(g_row.size());
  std::vector<double> f(g_row.size());

  if (alpha == 1.0 && beta == 0.0) {
    for (std::size_t m = 0; m < g_row.size(); ++m) f[m] = 1.0 / (m_count * std::abs(g_row[m]));
    return f;
  }

  double sum = 0.0;
  for (const auto& g : g_row) sum += std::pow(std::abs(g), beta);
  const double denom = std::pow(sum, alpha) * std::pow(m_count, 1.0 - alpha);
  for (std::size_t m = 0; m < g_row.size(); ++m) {
    f[m] = std::pow(std::abs(g_row[m]), beta - 1.0) / denom;
  }
  return f;
}

std::vector<std::complex<double>> steering_vector(
    std::span<const std::complex<double>> g_row, const SteeringParams& params) {
  require_nonzero(g_row);
  std::vector<std::complex<double>> w(g_row.size());
  if (is_formulation_ii(params)) {
    const auto m_count = static_cast<double>(g_row.size());
    for (std::size_t m = 0; m < g_row.size(); ++m) {
      w[m] = g_row[m] / (m_count * std::norm(g_row[m]));
    }
    return w;
  }
  const auto f = scale_function(g_row, params.alpha, params.beta);
  for (std::size_t m = 0; m < g_row.size(); ++m) {
    w[m] = f[m] * (g_row[m] / std::abs(g_row[m]));
  }
  return w;
}

SteeringSet build_steering(const GfTensor& tensor, const SteeringParams& params) {
  SteeringSet set;
  set.frequencies = tensor.frequencies;
  set.n_focus = tensor.n_focus;
  set.n_mics = tensor.n_mics;
  set.params = params;
  set.gf_provenance = tensor.provenance;
  set.weights.resize(tensor.values.size());
  parallel_for(tensor.n_focus, [&](std::size_t ni) {
    for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
      const auto w = steering_vector(tensor.row(q, ni), params);
      std::copy(w.begin(), w.end(),
                set.weights.begin() + static_cast<std::ptrdiff_t>((q * set.n_focus + ni) * set.n_mics));
    }
  });
  return set;
}

double psf_value(std::span<const std::complex<double>> g_focus,
                 std::span<const std::complex<double>> g_source,
                 const SteeringParams& params) {
  const auto w = steering_vector(g_focus, params);
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t m = 0; m < w.size(); ++m) sum += std::conj(w[m]) * g_source[m];
  return std::norm(sum);
}

std::vector<double> check_amplitude_condition(const GfTensor& tensor,
                                              std::size_t source_index,
                                              const SteeringParams& params) {
  if (source_index >= tensor.n_focus) {
    throw Error(ErrorCode::kIndexRange, "source index outside the grid");
  }
  std::vector<double> out(tensor.n_freq());
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    const auto g = tensor.row(q, source_index);
    out[q] = psf_value(g, g, params);
  }
  return out;
}

std::vector<double> check_local_max_condition(const GfTensor& tensor, const FocusGrid& grid,
                                              std::size_t source_index,
                                              const SteeringParams& params, double fd_step) {
  if (source_index >= tensor.n_focus || tensor.n_focus != grid.size()) {
    throw Error(ErrorCode::kIndexRange, "source index/grid size mismatch");
  }
  if (fd_step <= 0.0) throw Error(ErrorCode::kFdStep, "fd_step must be > 0");
  const long steps = std::lround(fd_step / grid.spacing);
  if (steps < 1 || std::abs(fd_step - static_cast<double>(steps) * grid.spacing) >
                       1e-9 * grid.spacing) {
    throw Error(ErrorCode::kFdStep, "fd_step must be an integer multiple of the grid spacing");
  }
  const auto s = static_cast<std::size_t>(steps);
  const std::size_t i = source_index % grid.nu;
  const std::size_t j = source_index / grid.nu;
  if (i < s || i + s >= grid.nu || j < s || j + s >= grid.nv) {
    throw Error(ErrorCode::kBoundary, "source too close to the grid boundary for central differences");
  }

  std::vector<double> out(tensor.n_freq());
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    const auto g_source = tensor.row(q, source_index);
    auto psf_at = [&](std::size_t ii, std::size_t jj) {
      return psf_value(tensor.row(q, grid.index(ii, jj)), g_source, params);
    };
    const double d1 = (psf_at(i + s, j) - psf_at(i - s, j)) / (2.0 * fd_step);
    const double d2 = (psf_at(i, j + s) - psf_at(i, j - s)) / (2.0 * fd_step);
    out[q] = std::hypot(d1, d2);
  }
  return out;
}

}  // namespace gfb
