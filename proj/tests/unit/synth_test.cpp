#include "spca/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "spca/diagnostics.hpp"
#include "spca/error.hpp"
#include "support.hpp"

namespace {

using std::numbers::pi;
using namespace spca::testing;

double outside_norm(const spca::ImageStack& s, int m) {
  const spca::DiskGrid grid(s.side);
  std::vector<char> inside(s.pixels_per_image(), 0);
  for (int p : grid.pixel()) inside[p] = 1;
  double acc = 0.0;
  const auto img = s.image(m);
  for (std::size_t p = 0; p < img.size(); ++p) {
    if (!inside[p]) acc += img[p] * img[p];
  }
  return std::sqrt(acc) / s.L();
}

TEST(Synth, DeterministicForSeed) {
  const auto& basis = basis_for(16);
  const spca::SynthConfig cfg{.count = 5, .seed = 42, .eps_space = 1e-3, .delta_c = 1e-3};
  const auto a = spca::synth_stack(cfg, basis);
  const auto b = spca::synth_stack(cfg, basis);
  ASSERT_EQ(a.stack.pixels.size(), b.stack.pixels.size());
  EXPECT_EQ(std::memcmp(a.stack.pixels.data(), b.stack.pixels.data(), a.stack.pixels.size() * sizeof(double)), 0);
  EXPECT_EQ(a.truth.values, b.truth.values);
  auto other = cfg;
  other.seed = 43;
  EXPECT_NE(spca::synth_stack(other, basis).stack.pixels, a.stack.pixels);
  EXPECT_EQ(a.stack.provenance, "synthetic seed=42");
}

TEST(Synth, InjectedSpaceNoiseNorm) {
  const auto& basis = basis_for(16);
  const auto r = spca::synth_stack({.count = 8, .seed = 2, .eps_space = 1e-3}, basis);
  for (int m = 0; m < 8; ++m) EXPECT_NEAR(outside_norm(r.stack, m), 1e-3, 1e-4);
  EXPECT_NEAR(r.eps_injected, 1e-3, 1e-4);
  EXPECT_GE(r.eps_effective, r.eps_injected + r.eps_leakage - 1e-18);
  EXPECT_EQ(r.delta_effective, 0.0);
  const auto clean = spca::synth_stack({.count = 2, .seed = 2}, basis);
  EXPECT_EQ(outside_norm(clean.stack, 0), 0.0);
  EXPECT_GT(clean.eps_leakage, 0.0);
}

TEST(Synth, HighPassComponent) {
  const auto& basis = basis_for(16, 10.0);
  const double delta = 1e-3;
  const auto base = spca::synth_stack({.count = 1, .seed = 5}, basis);
  const auto noisy = spca::synth_stack({.count = 1, .seed = 5, .delta_c = delta}, basis);
  const int side = 33, L = 16;
  std::vector<double> diff(base.stack.pixels.size());
  for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = noisy.stack.pixels[p] - base.stack.pixels[p];
  EXPECT_NEAR(norm2(diff) / L, delta / (2.0 * pi), 1e-12);
  EXPECT_NEAR(noisy.delta_effective, delta, 1e-12);
  const double c = basis.params().c;
  for (int fr = -side / 2; fr <= side / 2; ++fr) {
    for (int fq = -side / 2; fq <= side / 2; ++fq) {
      if (2.0 * pi * L / side * std::hypot(fr, fq) > c) continue;
      std::complex<double> s = 0.0;
      for (int r = 0; r < side; ++r)
        for (int q = 0; q < side; ++q) s += diff[r * side + q] * std::polar(1.0, -2.0 * pi * (fr * r + fq * q) / side);
      EXPECT_LT(std::abs(s), 1e-14) << fr << "," << fq;
    }
  }
}

TEST(Synth, InSpanRoundTrip) {
  const auto& basis = basis_for(16);
  const auto r = spca::synth_stack({.count = 4, .seed = 6}, basis);
  const double dev = spca::gram_spectrum(basis).max_deviation;
  const auto coeffs = spca::expand_direct(r.stack, basis);
  const auto back = spca::reconstruct_stack(coeffs, basis);
  for (int m = 0; m < 4; ++m) {
    double err = 0.0;
    for (std::size_t p = 0; p < r.stack.pixels_per_image(); ++p) err += std::pow(back.image(m)[p] - r.stack.image(m)[p], 2);
    EXPECT_LE(std::sqrt(err), 10.0 * dev * norm2(r.stack.image(m)));
  }
}

TEST(Synth, ConfigChecks) {
  const auto& basis = basis_for(16);
  EXPECT_THROW(spca::synth_stack({.count = 0}, basis), spca::ConfigError);
  EXPECT_THROW(spca::synth_stack({.count = 1, .side = 41}, basis), spca::ConfigError);
  EXPECT_THROW(spca::synth_stack({.count = 1, .eps_space = -1.0}, basis), spca::ConfigError);
  const auto even = spca::synth_stack({.count = 1, .side = 32}, basis);
  EXPECT_EQ(even.stack.side, 32);
}

}  // namespace
