#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "gfbeam/beamform.hpp"
#include "gfbeam/errors.hpp"
#include "gfbeam/steering.hpp"
#include "support/oracles.hpp"

using namespace gfb;
using namespace gfb::testing;

namespace {

std::vector<std::complex<double>> random_gf_row(std::mt19937& rng, std::size_t m_count) {
  std::uniform_real_distribution<double> mag(0.2, 3.0);
  std::uniform_real_distribution<double> phase(-pi, pi);
  std::vector<std::complex<double>> g(m_count);
  for (auto& v : g) v = std::polar(mag(rng), phase(rng));
  return g;
}

}  // namespace

TEST_CASE("scale function preset values") {
  std::mt19937 rng(1);
  const auto g = random_gf_row(rng, 5);

  // alpha = 0, beta = 1: f_m = 1/M
  for (double f : scale_function(g, 0.0, 1.0)) {
    CHECK(f == doctest::Approx(0.2).epsilon(1e-14));
  }

  // alpha = 1, beta = 2: f_m = |g_m| / ||g||^2
  double norm_sq = 0.0;
  for (const auto& v : g) norm_sq += std::norm(v);
  const auto f3 = scale_function(g, 1.0, 2.0);
  for (std::size_t m = 0; m < g.size(); ++m) {
    CHECK(f3[m] == doctest::Approx(std::abs(g[m]) / norm_sq).epsilon(1e-14));
  }

  // M = 1, g = 2: f = 2^(beta-1) / 2^(alpha*beta)
  const std::vector<std::complex<double>> scalar{{2.0, 0.0}};
  CHECK(scale_function(scalar, 1.0, 2.0)[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(scale_function(scalar, 0.5, 3.0)[0] ==
        doctest::Approx(std::pow(2.0, 3.0 - 1.0 - 0.5 * 3.0)).epsilon(1e-14));
}

TEST_CASE("zero-magnitude entries raise ZERO_GF") {
  std::vector<std::complex<double>> g{{1.0, 0.0}, {0.0, 0.0}};
  try {
    scale_function(g, 0.0, 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroGf);
  }
  CHECK_THROWS_AS(steering_vector(g, SteeringParams::from_preset(SteeringPreset::kI)), Error);
}

TEST_CASE("presets reproduce the free-field closed forms") {
  const double c = 343.0;
  const double f = 730.0;
  const double k = 2.0 * pi * f / c;
  MicrophoneArray array;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int m = 0; m < 7; ++m) array.positions.push_back({u(rng), u(rng), 1.0 + u(rng) * 0.3});
  const Vec3 y{0.05, -0.1, -0.2};

  std::vector<std::complex<double>> g(array.size());
  std::vector<double> r(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    r[m] = distance(array.positions[m], y);
    g[m] = freefield_gf(y, array.positions[m], f, c);
  }
  const double m_count = static_cast<double>(array.size());

  const auto w1 = steering_vector(g, SteeringParams::from_preset(SteeringPreset::kI));
  const auto w2 = steering_vector(g, SteeringParams::from_preset(SteeringPreset::kII));
  const auto w3 = steering_vector(g, SteeringParams::from_preset(SteeringPreset::kIII));
  double inv_r2_sum = 0.0;
  for (double rm : r) inv_r2_sum += 1.0 / (rm * rm);
  for (std::size_t m = 0; m < array.size(); ++m) {
    const auto phase = std::polar(1.0, -k * r[m]);
    CHECK(rel_err(w1[m], phase / m_count) < 1e-14);
    CHECK(rel_err(w2[m], phase * r[m] / m_count) < 1e-14);
    CHECK(rel_err(w3[m], phase / r[m] / inv_r2_sum) < 1e-14);
  }
}

TEST_CASE("preset III scalar case") {
  const std::vector<std::complex<double>> g{{0.5, 0.0}};
  const auto w = steering_vector(g, SteeringParams::from_preset(SteeringPreset::kIII));
  CHECK(w[0].real() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w[0].imag() == 0.0);
}

TEST_CASE("preset IV forwards (1/2, 1) into the generalized formula") {
  std::mt19937 rng(4);
  const auto g = random_gf_row(rng, 6);
  const auto w = steering_vector(g, SteeringParams::from_preset(SteeringPreset::kIV));
  const auto f = scale_function(g, 0.5, 1.0);
  for (std::size_t m = 0; m < g.size(); ++m) {
    CHECK(rel_err(w[m], f[m] * g[m] / std::abs(g[m])) < 1e-14);
  }
}

TEST_CASE("steering weights share the phase of g entrywise") {
  std::mt19937 rng(8);
  for (const auto params :
       {SteeringParams::from_preset(SteeringPreset::kI),
        SteeringParams::from_preset(SteeringPreset::kII),
        SteeringParams::from_preset(SteeringPreset::kIII),
        [] {
          SteeringParams p;
          p.alpha = 0.7;
          p.beta = 2.5;
          return p;
        }()}) {
    const auto g = random_gf_row(rng, 9);
    const auto w = steering_vector(g, params);
    for (std::size_t m = 0; m < g.size(); ++m) {
      const auto aligned = w[m] * std::conj(g[m]);
      CHECK(std::abs(aligned.imag()) <= 1e-12 * std::abs(aligned));
      CHECK(aligned.real() > 0.0);
    }
  }
}

TEST_CASE("amplitude condition: preset values") {
  GfTensor tensor;
  tensor.frequencies = {500.0};
  tensor.n_focus = 1;
  tensor.n_mics = 2;
  tensor.values = {{1.0, 0.0}, {0.0, 2.0}};  // |g| = (1, 2)
  tensor.provenance = "freefield";

  // preset I: A = ((1 + 2)/2)^2 = 2.25
  const auto a1 =
      check_amplitude_condition(tensor, 0, SteeringParams::from_preset(SteeringPreset::kI));
  CHECK(a1[0] == doctest::Approx(2.25).epsilon(1e-14));

  const auto a2 =
      check_amplitude_condition(tensor, 0, SteeringParams::from_preset(SteeringPreset::kII));
  CHECK(a2[0] == doctest::Approx(1.0).epsilon(1e-14));

  const auto a3 =
      check_amplitude_condition(tensor, 0, SteeringParams::from_preset(SteeringPreset::kIII));
  CHECK(a3[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("amplitude condition holds iff alpha = 1 (beta = 0 degenerate)") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    GfTensor tensor;
    tensor.frequencies = {100.0};
    tensor.n_focus = 1;
    tensor.n_mics = 2 + trial % 7;
    tensor.values = random_gf_row(rng, tensor.n_mics);
    tensor.provenance = "freefield";
    for (double beta : {-1.0, 0.0, 1.0, 2.0, 3.0}) {
      SteeringParams exact;
      exact.alpha = 1.0;
      exact.beta = beta;
      CHECK(std::abs(check_amplitude_condition(tensor, 0, exact)[0] - 1.0) < 1e-12);
      for (double alpha : {0.0, 0.5, 1.7}) {
        SteeringParams off;
        off.alpha = alpha;
        off.beta = beta;
        const double a = check_amplitude_condition(tensor, 0, off)[0];
        if (beta == 0.0) {
          // sum |g|^0 = M makes the scale function alpha-independent
          CHECK(std::abs(a - 1.0) < 1e-12);
        } else {
          CHECK(std::abs(a - 1.0) > 1e-9);
        }
      }
    }
  }
}

TEST_CASE("local max condition vanishes iff alpha = 1 - 1/beta") {
  std::mt19937 rng(2718);
  const double h = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const bool use_ism = trial % 2 == 0;
    const Scene scene = condition_scene(rng, 4 + trial, use_ism ? 2 : 0, h);
    GfTensor tensor;
    if (use_ism) {
      tensor = evaluate_gf_tensor(IsmProvider(scene.speed_of_sound, scene.reflectors, 2),
                                  scene, {900.0});
    } else {
      tensor = evaluate_gf_tensor(FreefieldProvider(scene.speed_of_sound), scene, {900.0});
    }

    for (double beta : {1.0, 2.0, 3.0}) {
      SteeringParams good;
      good.beta = beta;
      good.alpha = 1.0 - 1.0 / beta;
      const double a_s = check_amplitude_condition(tensor, kConditionSourceIndex, good)[0];
      const double grad =
          check_local_max_condition(tensor, scene.grid, kConditionSourceIndex, good, h)[0];
      CHECK(grad < 1e-6 * a_s / h);

      SteeringParams bad;
      bad.beta = beta;
      bad.alpha = 1.0 - 1.0 / beta + 0.5;
      const double a_bad = check_amplitude_condition(tensor, kConditionSourceIndex, bad)[0];
      const double grad_bad =
          check_local_max_condition(tensor, scene.grid, kConditionSourceIndex, bad, h)[0];
      CHECK(grad_bad > 1e-6 * a_bad / h);
    }
  }
}

TEST_CASE("local max condition rejects boundary sources and bad steps") {
  std::mt19937 rng(5);
  const Scene scene = condition_scene(rng, 4, 0);
  const auto tensor =
      evaluate_gf_tensor(FreefieldProvider(scene.speed_of_sound), scene, {500.0});
  const auto params = SteeringParams::from_preset(SteeringPreset::kI);
  try {
    check_local_max_condition(tensor, scene.grid, 0, params, scene.grid.spacing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBoundary);
  }
  try {
    check_local_max_condition(tensor, scene.grid, kConditionSourceIndex, params,
                              0.4 * scene.grid.spacing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFdStep);
  }
}

TEST_CASE("preset-I maps keep their argmax under g -> c*g") {
  std::mt19937 rng(99);
  Scene scene;
  scene.speed_of_sound = 343.0;
  scene.array = random_array(rng, 6);
  scene.grid = build_focus_grid({-0.2, -0.2, 0.0}, {1, 0, 0}, {0, 1, 0}, 0.4, 0.4, 0.05);
  const auto tensor = evaluate_gf_tensor(FreefieldProvider(343.0), scene, {800.0});

  GfTensor scaled = tensor;
  const std::complex<double> c{-0.3, 1.9};
  for (auto& v : scaled.values) v *= c;

  const auto params = SteeringParams::from_preset(SteeringPreset::kI);
  auto grid = std::make_shared<const FocusGrid>(scene.grid);
  const std::size_t source = scene.grid.index(4, 3);

  const auto maps = psf_map(tensor, source, build_steering(tensor, params), grid);
  const auto maps_scaled = psf_map(scaled, source, build_steering(scaled, params), grid);
  const auto argmax = [](const SourceMap& map) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < map.values.size(); ++n) {
      if (map.values[n] > map.values[best]) best = n;
    }
    return best;
  };
  CHECK(argmax(maps[0]) == argmax(maps_scaled[0]));
  CHECK(argmax(maps[0]) == source);
}
