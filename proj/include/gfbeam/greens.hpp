#ifndef GFBEAM_GREENS_HPP
#define GFBEAM_GREENS_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gfbeam/scene.hpp"

namespace gfb {

// Monopole transfer values g(focus, mic, f) for every (frequency, focus
// point, microphone) triple. Storage is (freq, focus, mic) row-major.
struct GfTensor {
  std::vector<double> frequencies;
  std::size_t n_focus = 0;
  std::size_t n_mics = 0;
  std::vector<std::complex<double>> values;
  std::string provenance;  // "freefield" | "ism" | "imported"

  std::size_t n_freq() const { return frequencies.size(); }
  std::size_t offset(std::size_t qi, std::size_t ni) const {
    return (qi * n_focus + ni) * n_mics;
  }
  std::span<const std::complex<double>> row(std::size_t qi, std::size_t ni) const {
    return {values.data() + offset(qi, ni), n_mics};
  }
  std::span<std::complex<double>> row(std::size_t qi, std::size_t ni) {
    return {values.data() + offset(qi, ni), n_mics};
  }
};

// One propagation path: straight-line distance of the (unfolded) ray and the
// product of the reflection coefficients picked up along it.
struct Ray {
  double distance = 0.0;
  double weight = 1.0;
};

class GfProvider {
 public:
  virtual ~GfProvider() = default;
  virtual std::complex<double> evaluate(const Vec3& source, const Vec3& receiver,
                                        double frequency) const = 0;
  // Same-geometry evaluation at many frequencies; overridden where the
  // geometric work (ray tracing) can be shared across the sweep.
  virtual void evaluate_all(const Vec3& source, const Vec3& receiver,
                            std::span<const double> frequencies,
                            std::span<std::complex<double>> out) const;
  virtual std::string provenance() const = 0;
};

// g = (1/r) exp(-j k r), k = 2*pi*f/c. No 4*pi factor.
std::complex<double> freefield_gf(const Vec3& source, const Vec3& receiver, double frequency,
                                  double speed_of_sound);

// Direct path plus all mirror-image paths up to reflection order max_order.
// Each image is kept only if the unfolded ray crosses every panel of its
// sequence inside the panel extent; weights multiply the panel coefficients.
std::complex<double> ism_gf(const Vec3& source, const Vec3& receiver, double frequency,
                            double speed_of_sound, const ReflectorSet& reflectors,
                            int max_order);

// Valid propagation paths from source to receiver (direct ray first). The
// enumeration mirrors the receiver across panel sequences, so it is the
// reciprocal of a source-image expansion.
std::vector<Ray> ism_trace(const Vec3& source, const Vec3& receiver,
                           const ReflectorSet& reflectors, int max_order);

std::complex<double> eval_rays(std::span<const Ray> rays, double wavenumber);

// Number of image-source candidates at exactly the given order for
// n_panels panels: n_panels * (n_panels-1)^(order-1), order >= 1.
std::size_t ism_candidate_count(std::size_t n_panels, int order);

class FreefieldProvider : public GfProvider {
 public:
  explicit FreefieldProvider(double speed_of_sound) : c_(speed_of_sound) {}
  std::complex<double> evaluate(const Vec3& source, const Vec3& receiver,
                                double frequency) const override;
  std::string provenance() const override { return "freefield"; }

 private:
  double c_;
};

class IsmProvider : public GfProvider {
 public:
  IsmProvider(double speed_of_sound, ReflectorSet reflectors, int max_order = 3);
  std::complex<double> evaluate(const Vec3& source, const Vec3& receiver,
                                double frequency) const override;
  void evaluate_all(const Vec3& source, const Vec3& receiver,
                    std::span<const double> frequencies,
                    std::span<std::complex<double>> out) const override;
  std::string provenance() const override { return "ism"; }
  int max_order() const { return max_order_; }

 private:
  double c_;
  ReflectorSet reflectors_;
  int max_order_;
};

// values[q, n, m] = provider(grid point n, mic m, f_q). Parallel over focus
// points; provider errors are rethrown with (freq, focus, mic) context.
GfTensor evaluate_gf_tensor(const GfProvider& provider, const Scene& scene,
                            const std::vector<double>& frequencies);

// Binary "GFT1" format (little-endian): magic, u32 n_freq/n_focus/n_mic,
// f64 frequencies, f64 interleaved (re, im) in (freq, focus, mic) order.
// Files ending in .csv use the debug variant freq_hz,focus_idx,mic_idx,re,im.
GfTensor import_gf_file(const std::string& path, const Scene& scene,
                        const std::vector<double>& frequencies);
void export_gf_file(const std::string& path, const GfTensor& tensor);

// NaN/Inf or zero-magnitude entries violate the tensor contract (steering
// denominators need |g| > 0); returns diagnostics rather than throwing.
std::vector<Diagnostic> validate_gf_tensor(const GfTensor& tensor);

}  // namespace gfb

#endif
