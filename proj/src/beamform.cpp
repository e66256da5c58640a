/*
 * Map generation: frequency-domain dirty maps w^H C w, point spread
 * functions, and the time-domain delay-and-sum reference beamformer.
 */
#include "gfbeam/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"

namespace gfb {

namespace {

void require_frequency_match(double f_csm, double f_steer, double bin_spacing) {
  const double tol = std::max(0.5 * bin_spacing, 1e-9 * std::max(1.0, std::abs(f_steer)));
  if (std::abs(f_csm - f_steer) > tol) {
    std::ostringstream msg;
    msg << "CSM bin " << f_csm << " Hz does not match steering frequency " << f_steer
        << " Hz (tolerance " << tol << " Hz)";
    throw Error(ErrorCode::kFreqMismatch, msg.str());
  }
}

}  // namespace

SourceMap dirty_map(const Csm& csm, std::size_t csm_freq_index, const SteeringSet& steering,
                    std::size_t steer_freq_index, std::shared_ptr<const FocusGrid> grid) {
  if (csm_freq_index >= csm.n_freq() || steer_freq_index >= steering.n_freq()) {
    throw Error(ErrorCode::kIndexRange, "frequency index out of range");
  }
  if (csm.n_mics != steering.n_mics) {
    throw Error(ErrorCode::kDimensionMismatch, "CSM and steering mic counts differ");
  }
  if (grid && grid->size() != steering.n_focus) {
    throw Error(ErrorCode::kDimensionMismatch, "grid size does not match steering set");
  }
  require_frequency_match(csm.frequencies[csm_freq_index],
                          steering.frequencies[steer_freq_index], csm.bin_spacing);

  const std::size_t m_count = csm.n_mics;
  const auto matrix = csm.matrix(csm_freq_index);

  SourceMap map;
  map.frequency = steering.frequencies[steer_freq_index];
  map.grid = std::move(grid);
  map.params = steering.params;
  map.gf_provenance = steering.gf_provenance;
  map.values.resize(steering.n_focus);

  parallel_for(steering.n_focus, [&](std::size_t ni) {
    const auto w = steering.row(steer_freq_index, ni);
    std::complex<double> acc{0.0, 0.0};
    double abs_acc = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      std::complex<double> row_sum{0.0, 0.0};
      for (std::size_t n = 0; n < m_count; ++n) {
        row_sum += matrix[m * m_count + n] * w[n];
      }
      acc += std::conj(w[m]) * row_sum;
      abs_acc += std::abs(w[m]) * std::abs(row_sum);
    }
    // w^H C w is real for Hermitian C; anything beyond roundoff means the
    // inputs are inconsistent rather than a value to silently truncate.
    const double tol = std::max(1e-10 * std::abs(acc.real()), 1e-12 * abs_acc);
    if (std::abs(acc.imag()) > tol) {
      std::ostringstream msg;
      msg << "imaginary residue " << acc.imag() << " at focus " << ni
          << " exceeds tolerance " << tol;
      throw Error(ErrorCode::kNonfiniteValue, msg.str());
    }
    map.values[ni] = acc.real();
  });
  return map;
}

std::vector<SourceMap> psf_map(const GfTensor& tensor, std::size_t source_index,
                               const SteeringSet& steering,
                               std::shared_ptr<const FocusGrid> grid) {
  if (source_index >= tensor.n_focus) {
    throw Error(ErrorCode::kIndexRange, "source index outside the grid");
  }
  if (tensor.n_focus != steering.n_focus || tensor.n_mics != steering.n_mics ||
      tensor.n_freq() != steering.n_freq()) {
    throw Error(ErrorCode::kDimensionMismatch, "tensor and steering dimensions differ");
  }
  std::vector<SourceMap> maps(tensor.n_freq());
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    require_frequency_match(tensor.frequencies[q], steering.frequencies[q], 0.0);
    SourceMap& map = maps[q];
    map.frequency = tensor.frequencies[q];
    map.grid = grid;
    map.params = steering.params;
    map.gf_provenance = steering.gf_provenance;
    map.values.resize(tensor.n_focus);
    const auto g_source = tensor.row(q, source_index);
    parallel_for(tensor.n_focus, [&](std::size_t ni) {
      const auto w = steering.row(q, ni);
      std::complex<double> sum{0.0, 0.0};
      for (std::size_t m = 0; m < tensor.n_mics; ++m) {
        sum += std::conj(w[m]) * g_source[m];
      }
      map.values[ni] = std::norm(sum);
    });
  }
  return maps;
}

namespace {

double kaiser(double u, double halfwidth, double beta) {
  const double t = u / halfwidth;
  const double arg = 1.0 - t * t;
  if (arg <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(arg)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(pi * x) / (pi * x);
}

constexpr int kSincHalfTaps = 8;  // 16-tap interpolator
constexpr double kKaiserBeta = 8.0;

// Sample reach of p(t + delay) beyond the output index, in whole samples.
std::size_t interp_reach(double delay_samples, Interpolation interp) {
  switch (interp) {
    case Interpolation::kNearest:
      return static_cast<std::size_t>(std::lround(delay_samples));
    case Interpolation::kLinear:
      return static_cast<std::size_t>(std::ceil(delay_samples));
    case Interpolation::kSinc:
      return static_cast<std::size_t>(std::floor(delay_samples)) + kSincHalfTaps;
  }
  return 0;
}

double sample_delayed(std::span<const double> p, std::size_t i, double delay_samples,
                      Interpolation interp) {
  switch (interp) {
    case Interpolation::kNearest:
      return p[i + static_cast<std::size_t>(std::lround(delay_samples))];
    case Interpolation::kLinear: {
      const double pos = static_cast<double>(i) + delay_samples;
      const auto base = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - std::floor(pos);
      return (1.0 - frac) * p[base] + frac * p[base + 1];
    }
    case Interpolation::kSinc: {
      const double pos = static_cast<double>(i) + delay_samples;
      const auto base = static_cast<long>(std::floor(pos));
      const double frac = pos - std::floor(pos);
      double acc = 0.0;
      for (int n = -kSincHalfTaps + 1; n <= kSincHalfTaps; ++n) {
        const long idx = base + n;
        if (idx < 0 || idx >= static_cast<long>(p.size())) continue;
        const double u = static_cast<double>(n) - frac;
        acc += p[static_cast<std::size_t>(idx)] * sinc(u) * kaiser(u, kSincHalfTaps, kKaiserBeta);
      }
      return acc;
    }
  }
  return 0.0;
}

}  // namespace

std::vector<double> td_beamform_point(const TimeRecord& record, const MicrophoneArray& array,
                                      const Vec3& focus, double speed_of_sound,
                                      Interpolation interpolation) {
  const std::size_t m_count = array.size();
  if (record.n_channels != m_count) {
    throw Error(ErrorCode::kDimensionMismatch, "record channels do not match the array");
  }
  std::vector<double> delays(m_count);
  std::vector<double> weights(m_count);
  std::size_t reach = 0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const double r = distance(array.positions[m], focus);
    delays[m] = r / speed_of_sound * record.sample_rate;
    weights[m] = 4.0 * pi * r;
    reach = std::max(reach, interp_reach(delays[m], interpolation));
  }
  if (record.n_samples <= reach) {
    throw Error(ErrorCode::kTooShort, "record shorter than the maximum applied delay");
  }
  const std::size_t n_out = record.n_samples - reach;
  std::vector<double> out(n_out, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto channel = record.channel(m);
    for (std::size_t i = 0; i < n_out; ++i) {
      out[i] += inv_m * weights[m] * sample_delayed(channel, i, delays[m], interpolation);
    }
  }
  return out;
}

TdOutput td_beamform(const TimeRecord& record, const Scene& scene,
                     Interpolation interpolation) {
  // A common output length across focus points: the largest delay any point
  // needs determines how much of the record every series can use.
  std::size_t reach = 0;
  for (std::size_t n = 0; n < scene.grid.size(); ++n) {
    const Vec3 focus = scene.grid.point(n);
    for (const Vec3& mic : scene.array.positions) {
      const double d = distance(mic, focus) / scene.speed_of_sound * record.sample_rate;
      reach = std::max(reach, interp_reach(d, interpolation));
    }
  }
  if (record.n_samples <= reach) {
    throw Error(ErrorCode::kTooShort, "record shorter than the maximum applied delay");
  }
  TdOutput out;
  out.sample_rate = record.sample_rate;
  out.n_focus = scene.grid.size();
  out.n_samples = record.n_samples - reach;
  out.data.resize(out.n_focus * out.n_samples);
  parallel_for(out.n_focus, [&](std::size_t n) {
    const auto series = td_beamform_point(record, scene.array, scene.grid.point(n),
                                          scene.speed_of_sound, interpolation);
    std::copy_n(series.begin(), out.n_samples,
                out.data.begin() + static_cast<std::ptrdiff_t>(n * out.n_samples));
  });
  return out;
}

TdSpectrum td_spectrum(const TdOutput& output, const WelchParams& params) {
  TdSpectrum spectrum;
  spectrum.n_focus = output.n_focus;
  for (std::size_t n = 0; n < output.n_focus; ++n) {
    TimeRecord record;
    record.sample_rate = output.sample_rate;
    record.n_channels = 1;
    record.n_samples = output.n_samples;
    const auto series = output.series(n);
    record.data.assign(series.begin(), series.end());
    const Csm csm = welch_csm(record, params);
    if (n == 0) {
      spectrum.frequencies = csm.frequencies;
      spectrum.values.resize(output.n_focus * csm.n_freq());
    }
    for (std::size_t q = 0; q < csm.n_freq(); ++q) {
      spectrum.values[n * csm.n_freq() + q] = csm.matrix(q)[0].real();
    }
  }
  return spectrum;
}

void export_map_csv(const std::string& path, const SourceMap& map) {
  if (!map.grid) throw Error(ErrorCode::kConfig, "map has no grid reference");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "x,y,value_linear,value_db\n";
  char line[128];
  const FocusGrid& grid = *map.grid;
  for (std::size_t n = 0; n < map.values.size(); ++n) {
    const double u = static_cast<double>(n % grid.nu) * grid.spacing;
    const double v = static_cast<double>(n / grid.nu) * grid.spacing;
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", u, v, map.values[n],
                  to_db(map.values[n]));
    out << line;
  }
}

void export_maps_binary(const std::string& path, const std::vector<SourceMap>& maps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const char magic[4] = {'M', 'A', 'P', '1'};
  out.write(magic, 4);
  const std::uint32_t n_freq = static_cast<std::uint32_t>(maps.size());
  const std::uint32_t n_focus = maps.empty() ? 0 : static_cast<std::uint32_t>(maps[0].values.size());
  out.write(reinterpret_cast<const char*>(&n_freq), sizeof(n_freq));
  out.write(reinterpret_cast<const char*>(&n_focus), sizeof(n_focus));
  for (const SourceMap& map : maps) {
    out.write(reinterpret_cast<const char*>(&map.frequency), sizeof(double));
  }
  for (const SourceMap& map : maps) {
    if (map.values.size() != n_focus) {
      throw Error(ErrorCode::kDimensionMismatch, "stacked maps differ in grid size");
    }
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size() * sizeof(double)));
  }
}

}  // namespace gfb
