/*
 * Green's-function providers: analytic free field and the image source
 * method over finite rigid panels. The ISM enumeration mirrors the receiver
 * across panel sequences (reciprocal form), so the geometric work can be
 * shared across a frequency sweep.
 */
#include "gfbeam/greens.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"

namespace gfb {

void GfProvider::evaluate_all(const Vec3& source, const Vec3& receiver,
                              std::span<const double> frequencies,
                              std::span<std::complex<double>> out) const {
  for (std::size_t q = 0; q < frequencies.size(); ++q) {
    out[q] = evaluate(source, receiver, frequencies[q]);
  }
}

std::complex<double> freefield_gf(const Vec3& source, const Vec3& receiver, double frequency,
                                  double speed_of_sound) {
  if (frequency < 0.0) throw Error(ErrorCode::kConfig, "negative frequency");
  if (speed_of_sound <= 0.0) throw Error(ErrorCode::kConfig, "speed of sound must be > 0");
  const double r = distance(source, receiver);
  if (r <= 1e-9) throw Error(ErrorCode::kCoincident, "source and receiver coincide");
  const double k = 2.0 * pi * frequency / speed_of_sound;
  return std::polar(1.0 / r, -k * r);
}

namespace {

// Intersection of segment [a, b] with the panel plane; valid only when the
// segment properly crosses the plane and the hit lies inside the extent.
bool panel_hit(const Panel& panel, const Vec3& a, const Vec3& b) {
  const Vec3 n = panel.unit_normal();
  const double da = dot(n, a - panel.corner);
  const double db = dot(n, b - panel.corner);
  if (!(da * db < 0.0)) return false;
  const double t = da / (da - db);
  const Vec3 hit = a + t * (b - a);
  const Vec3 rel = hit - panel.corner;
  const double s1 = dot(rel, panel.edge1) / dot(panel.edge1, panel.edge1);
  if (s1 < 0.0 || s1 > 1.0) return false;
  const double s2 = dot(rel, panel.edge2) / dot(panel.edge2, panel.edge2);
  return s2 >= 0.0 && s2 <= 1.0;
}

Vec3 panel_hit_point(const Panel& panel, const Vec3& a, const Vec3& b) {
  const Vec3 n = panel.unit_normal();
  const double da = dot(n, a - panel.corner);
  const double db = dot(n, b - panel.corner);
  const double t = da / (da - db);
  return a + t * (b - a);
}

void check_off_planes(const Vec3& p, const ReflectorSet& reflectors, const char* role) {
  for (std::size_t i = 0; i < reflectors.size(); ++i) {
    if (reflectors[i].plane_distance(p) <= 1e-9) {
      std::ostringstream msg;
      msg << role << " lies on the plane of panel " << i;
      throw Error(ErrorCode::kOnReflector, msg.str());
    }
  }
}

}  // namespace

std::vector<Ray> ism_trace(const Vec3& source, const Vec3& receiver,
                           const ReflectorSet& reflectors, int max_order) {
  if (max_order < 0) throw Error(ErrorCode::kConfig, "max_order must be >= 0");
  if (!reflectors.empty()) {
    check_off_planes(source, reflectors, "source");
    check_off_planes(receiver, reflectors, "receiver");
  }

  std::vector<Ray> rays;
  const double direct = distance(source, receiver);
  if (direct <= 1e-9) throw Error(ErrorCode::kCoincident, "source and receiver coincide");
  rays.push_back({direct, 1.0});
  if (max_order == 0 || reflectors.empty()) return rays;

  const std::size_t n_panels = reflectors.size();
  // DFS over reversed panel sequences; images[t] is the receiver mirrored
  // across the first t panels of the reversed sequence, so images[depth-i+1]
  // is the aim point for the i-th physical reflection.
  std::vector<Vec3> images;
  images.reserve(static_cast<std::size_t>(max_order) + 1);
  images.push_back(receiver);
  std::vector<std::size_t> sequence;  // reversed: sequence[0] = last hit panel

  auto validate_and_emit = [&]() {
    const std::size_t depth = sequence.size();
    double weight = 1.0;
    for (std::size_t idx : sequence) weight *= reflectors[idx].reflection;
    if (weight == 0.0) return;

    Vec3 current = source;
    for (std::size_t i = 0; i < depth; ++i) {
      // i-th physical panel is sequence[depth-1-i]; its aim point is the
      // receiver image mirrored across the remaining panels.
      const Panel& panel = reflectors[sequence[depth - 1 - i]];
      const Vec3& target = images[depth - i];
      if (!panel_hit(panel, current, target)) return;
      current = panel_hit_point(panel, current, target);
    }
    const double length = distance(source, images[depth]);
    if (length <= 1e-9) throw Error(ErrorCode::kCoincident, "degenerate image path");
    rays.push_back({length, weight});
  };

  std::function<void(void)> descend = [&]() {
    for (std::size_t p = 0; p < n_panels; ++p) {
      if (!sequence.empty() && sequence.back() == p) continue;
      sequence.push_back(p);
      images.push_back(reflectors[p].mirror(images.back()));
      validate_and_emit();
      if (sequence.size() < static_cast<std::size_t>(max_order)) descend();
      images.pop_back();
      sequence.pop_back();
    }
  };
  descend();
  return rays;
}

std::complex<double> eval_rays(std::span<const Ray> rays, double wavenumber) {
  std::complex<double> sum{0.0, 0.0};
  for (const Ray& ray : rays) {
    sum += std::polar(ray.weight / ray.distance, -wavenumber * ray.distance);
  }
  return sum;
}

std::complex<double> ism_gf(const Vec3& source, const Vec3& receiver, double frequency,
                            double speed_of_sound, const ReflectorSet& reflectors,
                            int max_order) {
  if (frequency < 0.0) throw Error(ErrorCode::kConfig, "negative frequency");
  if (speed_of_sound <= 0.0) throw Error(ErrorCode::kConfig, "speed of sound must be > 0");
  const auto rays = ism_trace(source, receiver, reflectors, max_order);
  return eval_rays(rays, 2.0 * pi * frequency / speed_of_sound);
}

std::size_t ism_candidate_count(std::size_t n_panels, int order) {
  if (order < 1 || n_panels == 0) return 0;
  std::size_t count = n_panels;
  for (int i = 1; i < order; ++i) count *= n_panels - 1;
  return count;
}

std::complex<double> FreefieldProvider::evaluate(const Vec3& source, const Vec3& receiver,
                                                 double frequency) const {
  return freefield_gf(source, receiver, frequency, c_);
}

IsmProvider::IsmProvider(double speed_of_sound, ReflectorSet reflectors, int max_order)
    : c_(speed_of_sound), reflectors_(std::move(reflectors)), max_order_(max_order) {
  if (max_order_ < 0) throw Error(ErrorCode::kConfig, "max_order must be >= 0");
}

std::complex<double> IsmProvider::evaluate(const Vec3& source, const Vec3& receiver,
                                           double frequency) const {
  return ism_gf(source, receiver, frequency, c_, reflectors_, max_order_);
}

void IsmProvider::evaluate_all(const Vec3& source, const Vec3& receiver,
                               std::span<const double> frequencies,
                               std::span<std::complex<double>> out) const {
  const auto rays = ism_trace(source, receiver, reflectors_, max_order_);
  for (std::size_t q = 0; q < frequencies.size(); ++q) {
    out[q] = eval_rays(rays, 2.0 * pi * frequencies[q] / c_);
  }
}

GfTensor evaluate_gf_tensor(const GfProvider& provider, const Scene& scene,
                            const std::vector<double>& frequencies) {
  if (frequencies.empty()) throw Error(ErrorCode::kConfig, "no frequencies requested");
  for (double f : frequencies) {
    if (f < 0.0) throw Error(ErrorCode::kConfig, "negative frequency");
  }
  GfTensor tensor;
  tensor.frequencies = frequencies;
  tensor.n_focus = scene.grid.size();
  tensor.n_mics = scene.array.size();
  tensor.provenance = provider.provenance();
  tensor.values.resize(tensor.n_freq() * tensor.n_focus * tensor.n_mics);

  const std::size_t n_freq = tensor.n_freq();
  const std::size_t n_mics = tensor.n_mics;
  parallel_for(tensor.n_focus, [&](std::size_t ni) {
    const Vec3 focus = scene.grid.point(ni);
    std::vector<std::complex<double>> column(n_freq);
    for (std::size_t m = 0; m < n_mics; ++m) {
      try {
        provider.evaluate_all(focus, scene.array.positions[m], tensor.frequencies, column);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << e.what() << " (focus " << ni << ", mic " << m << ")";
        throw Error(e.code(), msg.str());
      }
      for (std::size_t q = 0; q < n_freq; ++q) {
        tensor.values[(q * tensor.n_focus + ni) * n_mics + m] = column[q];
      }
    }
  });
  return tensor;
}

std::vector<Diagnostic> validate_gf_tensor(const GfTensor& tensor) {
  std::vector<Diagnostic> out;
  if (tensor.values.size() != tensor.n_freq() * tensor.n_focus * tensor.n_mics) {
    out.push_back({"DIMENSION_MISMATCH", DiagnosticSeverity::kError,
                   "tensor value count does not match its dimensions"});
    return out;
  }
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    for (std::size_t n = 0; n < tensor.n_focus; ++n) {
      for (std::size_t m = 0; m < tensor.n_mics; ++m) {
        const auto v = tensor.values[(q * tensor.n_focus + n) * tensor.n_mics + m];
        std::ostringstream where;
        where << "(freq " << q << ", focus " << n << ", mic " << m << ")";
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          out.push_back({"NONFINITE_VALUE", DiagnosticSeverity::kError,
                         "nonfinite GF value at " + where.str()});
        } else if (std::abs(v) == 0.0) {
          out.push_back({"ZERO_GF", DiagnosticSeverity::kError,
                         "zero-magnitude GF value at " + where.str()});
        }
      }
    }
  }
  return out;
}

namespace {

constexpr char kGfMagic[4] = {'G', 'F', 'T', '1'};

void write_exact(std::ofstream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_exact(std::ifstream& in, void* data, std::size_t size, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) {
    throw Error(ErrorCode::kFormatMismatch, std::string("truncated GF file reading ") + what);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void export_gf_csv(const std::string& path, const GfTensor& tensor) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "freq_hz,focus_idx,mic_idx,re,im\n";
  char line[128];
  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    for (std::size_t n = 0; n < tensor.n_focus; ++n) {
      for (std::size_t m = 0; m < tensor.n_mics; ++m) {
        const auto v = tensor.values[(q * tensor.n_focus + n) * tensor.n_mics + m];
        std::snprintf(line, sizeof(line), "%.17g,%zu,%zu,%.17g,%.17g\n",
                      tensor.frequencies[q], n, m, v.real(), v.imag());
        out << line;
      }
    }
  }
}

GfTensor import_gf_csv(const std::string& path, const Scene& scene,
                       const std::vector<double>& frequencies) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);

  GfTensor tensor;
  tensor.frequencies = frequencies;
  tensor.n_focus = scene.grid.size();
  tensor.n_mics = scene.array.size();
  tensor.provenance = "imported";
  const double nan = std::nan("");
  tensor.values.assign(frequencies.size() * tensor.n_focus * tensor.n_mics, {nan, nan});

  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double f, re, im;
    std::size_t n, m;
    if (std::sscanf(line.c_str(), "%lf,%zu,%zu,%lf,%lf", &f, &n, &m, &re, &im) != 5) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw Error(ErrorCode::kFormatMismatch, "unparseable CSV GF row: " + line);
    }
    first = false;
    std::size_t qi = frequencies.size();
    for (std::size_t q = 0; q < frequencies.size(); ++q) {
      if (std::abs(frequencies[q] - f) <= 1e-6 * std::max(1.0, std::abs(frequencies[q]))) {
        qi = q;
        break;
      }
    }
    if (qi == frequencies.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "CSV GF frequency not in the requested list: " + std::to_string(f));
    }
    if (n >= tensor.n_focus || m >= tensor.n_mics) {
      throw Error(ErrorCode::kDimensionMismatch, "CSV GF index out of range: " + line);
    }
    tensor.values[(qi * tensor.n_focus + n) * tensor.n_mics + m] = {re, im};
  }

  for (std::size_t q = 0; q < tensor.n_freq(); ++q) {
    for (std::size_t n = 0; n < tensor.n_focus; ++n) {
      for (std::size_t m = 0; m < tensor.n_mics; ++m) {
        const auto v = tensor.values[(q * tensor.n_focus + n) * tensor.n_mics + m];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          std::ostringstream msg;
          msg << "missing or nonfinite GF value at (freq " << q << ", focus " << n
              << ", mic " << m << ")";
          throw Error(ErrorCode::kNonfiniteValue, msg.str());
        }
      }
    }
  }
  return tensor;
}

}  // namespace

void export_gf_file(const std::string& path, const GfTensor& tensor) {
  if (ends_with(path, ".csv")) {
    export_gf_csv(path, tensor);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_exact(out, kGfMagic, 4);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(tensor.n_freq()),
                                 static_cast<std::uint32_t>(tensor.n_focus),
                                 static_cast<std::uint32_t>(tensor.n_mics)};
  write_exact(out, dims, sizeof(dims));
  write_exact(out, tensor.frequencies.data(), tensor.frequencies.size() * sizeof(double));
  write_exact(out, tensor.values.data(),
              tensor.values.size() * sizeof(std::complex<double>));
}

GfTensor import_gf_file(const std::string& path, const Scene& scene,
                        const std::vector<double>& frequencies) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kGfMagic, 4) == 0) {
    std::uint32_t dims[3];
    read_exact(in, dims, sizeof(dims), "dimensions");
    if (dims[0] != frequencies.size() || dims[1] != scene.grid.size() ||
        dims[2] != scene.array.size()) {
      std::ostringstream msg;
      msg << "file has (" << dims[0] << ", " << dims[1] << ", " << dims[2]
          << "), expected (" << frequencies.size() << ", " << scene.grid.size() << ", "
          << scene.array.size() << ")";
      throw Error(ErrorCode::kDimensionMismatch, msg.str());
    }
    GfTensor tensor;
    tensor.frequencies.resize(dims[0]);
    tensor.n_focus = dims[1];
    tensor.n_mics = dims[2];
    tensor.provenance = "imported";
    read_exact(in, tensor.frequencies.data(), dims[0] * sizeof(double), "frequencies");
    for (std::size_t q = 0; q < frequencies.size(); ++q) {
      if (std::abs(tensor.frequencies[q] - frequencies[q]) >
          1e-9 * std::max(1.0, std::abs(frequencies[q]))) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "file frequency list does not match the requested frequencies");
      }
    }
    tensor.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    read_exact(in, tensor.values.data(),
               tensor.values.size() * sizeof(std::complex<double>), "values");
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
      const auto v = tensor.values[i];
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        const std::size_t m = i % tensor.n_mics;
        const std::size_t n = (i / tensor.n_mics) % tensor.n_focus;
        const std::size_t q = i / (tensor.n_mics * tensor.n_focus);
        std::ostringstream msg;
        msg << "nonfinite GF value at (freq " << q << ", focus " << n << ", mic " << m << ")";
        throw Error(ErrorCode::kNonfiniteValue, msg.str());
      }
    }
    return tensor;
  }
  if (ends_with(path, ".csv")) return import_gf_csv(path, scene, frequencies);
  throw Error(ErrorCode::kFormatMismatch, "not a GFT1 file: " + path);
}

}  // namespace gfb
