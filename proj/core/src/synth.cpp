#include "spca/synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "spca/disk_grid.hpp"
#include "fftw_lock.hpp"
#include "spca/error.hpp"

namespace spca {
namespace {

// Real white noise filtered to grid frequencies |omega| > c, omega = 2 pi L f / side.
std::vector<double> high_pass_noise(std::mt19937_64& rng, int side, int L, double c) {
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(side) * side);
  for (auto& v : buf) v = normal(rng);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_2d(side, side, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_2d(side, side, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  const double unit = 2.0 * std::numbers::pi * L / side;
  for (int r = 0; r < side; ++r) {
    const int fr = r <= side / 2 ? r : r - side;
    for (int q = 0; q < side; ++q) {
      const int fq = q <= side / 2 ? q : q - side;
      if (unit * std::hypot(fr, fq) <= c) buf[static_cast<std::size_t>(r) * side + q] = 0.0;
    }
  }
  fftw_execute(inv);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace

SynthResult synth_stack(const SynthConfig& config, const PswfBasis& basis) {
  const int L = basis.params().L;
  const int side = config.side > 0 ? config.side : 2 * L + 1;
  if (DiskGrid::rate_for_side(side) != L) throw ConfigError("synthetic image side does not match basis rate");
  if (config.count < 1) throw ConfigError("synthetic stack needs at least one image");
  if (config.eps_space < 0.0 || config.delta_c < 0.0) throw ConfigError("concentration levels must be nonnegative");
  const double c = basis.params().c;
  if (config.delta_c > 0.0 && c >= std::numbers::pi * L * std::numbers::sqrt2) {
    throw ConfigError("no grid frequencies lie above the bandlimit");
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;

  SynthResult out;
  out.truth.basis_hash = basis.hash();
  out.truth.method = ExpansionMethod::Direct;
  out.truth.side = side;
  out.truth.indices = basis.indices();
  out.truth.values.resize(static_cast<Eigen::Index>(basis.size()), config.count);
  const double tau = config.decay * L;
  for (int m = 0; m < config.count; ++m) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const auto& ix = basis.indices()[i];
      const double sd = std::exp(-(ix.N + ix.n) / tau);
      std::complex<double> g;
      if (ix.N == 0) {
        g = config.mean_scale * std::exp(-ix.n / tau) + sd * normal(rng);
      } else {
        const double re = normal(rng);
        g = sd * std::complex<double>(re, normal(rng)) / std::numbers::sqrt2;
      }
      out.truth.values(static_cast<Eigen::Index>(i), m) = g;
    }
  }

  out.stack = reconstruct_stack(out.truth, basis);
  out.stack.provenance = "synthetic seed=" + std::to_string(config.seed);

  const DiskGrid grid(side);
  std::vector<char> inside(static_cast<std::size_t>(side) * side, 0);
  for (int p : grid.pixel()) inside[p] = 1;

  for (int m = 0; m < config.count; ++m) {
    auto img = out.stack.image(m);
    double leak = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double mult = basis.indices()[i].N == 0 ? 1.0 : 2.0;
      leak += mult * std::norm(out.truth.values(static_cast<Eigen::Index>(i), m)) *
              std::max(0.0, 1.0 - std::norm(basis.eigenpair(i).lambda));
    }
    leak = std::sqrt(leak) / L;

    double eps_image = 0.0;
    if (config.eps_space > 0.0) {
      std::vector<double> noise(img.size(), 0.0);
      double s = 0.0;
      for (std::size_t p = 0; p < img.size(); ++p) {
        if (inside[p]) continue;
        noise[p] = normal(rng);
        s += noise[p] * noise[p];
      }
      const double scale = s > 0.0 ? config.eps_space * L / std::sqrt(s) : 0.0;
      for (std::size_t p = 0; p < img.size(); ++p) img[p] += scale * noise[p];
      eps_image = scale * std::sqrt(s) / L;
    }
    double delta_image = 0.0;
    double delta_outside = 0.0;
    if (config.delta_c > 0.0) {
      auto hp = high_pass_noise(rng, side, L, c);
      double s = 0.0;
      for (double v : hp) s += v * v;
      // Spatial L2 norm delta_c / 2 pi gives Fourier-side norm delta_c.
      const double scale = s > 0.0 ? (config.delta_c / (2.0 * std::numbers::pi)) * L / std::sqrt(s) : 0.0;
      double so = 0.0;
      for (std::size_t p = 0; p < img.size(); ++p) {
        img[p] += scale * hp[p];
        if (!inside[p]) so += hp[p] * hp[p];
      }
      delta_outside = scale * std::sqrt(so) / L;
      delta_image = scale * std::sqrt(s) / L * 2.0 * std::numbers::pi;
    }
    out.eps_injected = std::max(out.eps_injected, eps_image);
    out.eps_leakage = std::max(out.eps_leakage, leak);
    out.eps_effective = std::max(out.eps_effective, leak + eps_image + delta_outside);
    out.delta_effective = std::max(out.delta_effective, delta_image);
  }
  return out;
}

}  // namespace spca
