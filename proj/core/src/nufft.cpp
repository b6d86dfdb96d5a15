#include "spca/nufft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fftw_lock.hpp"
#include "spca/error.hpp"
#include "spca/gauss_legendre.hpp"
#include "spca/quadrature.hpp"

namespace spca {

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

void check_image(std::span<const double> image, int side) {
  if (image.size() != static_cast<std::size_t>(side) * side) {
    std::ostringstream msg;
    msg << "image has " << image.size() << " pixels, expected " << side << "x" << side;
    throw ConfigError(msg.str());
  }
}

}  // namespace

struct NufftPlan::FftHandle {
  fftw_plan plan = nullptr;
  ~FftHandle() {
    if (plan) {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

PolarTargetSet PolarTargetSet::from_rule(const QuadratureRule& rule) {
  PolarTargetSet t;
  t.ring_offsets = rule.ring_offsets();
  t.ux.reserve(rule.total_nodes());
  t.uy.reserve(rule.total_nodes());
  for (std::size_t l = 0; l < rule.rings(); ++l) {
    const int n = rule.angular_counts[l];
    const double r = rule.radial_nodes[l];
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * std::numbers::pi * j / n;
      t.ux.push_back(r * std::cos(th));
      t.uy.push_back(r * std::sin(th));
    }
  }
  return t;
}

std::vector<std::complex<double>> phi_direct(std::span<const double> image, int side, const PolarTargetSet& targets,
                                             double c) {
  check_image(image, side);
  const DiskGrid grid(side);
  const int L = grid.L();
  std::vector<std::complex<double>> out(targets.size());
  std::vector<std::complex<double>> ex(2 * L + 1), ey(2 * L + 1);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double ax = c * targets.ux[t] / L;
    const double ay = c * targets.uy[t] / L;
    for (int k = -L; k <= L; ++k) {
      ex[k + L] = std::polar(1.0, -ax * k);
      ey[k + L] = std::polar(1.0, -ay * k);
    }
    std::complex<double> s = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      s += image[grid.pixel()[p]] * (ex[grid.kx()[p] + L] * ey[grid.ky()[p] + L]);
    }
    out[t] = s;
  }
  return out;
}

int next_smooth(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

NufftPlan::NufftPlan(int side, const PolarTargetSet& targets, double c, double eps)
    : grid_(side), L_(grid_.L()), fft_(std::make_unique<FftHandle>()) {
  if (!(eps > 0.0 && eps < 1e-2)) throw ConfigError("eps_nufft must lie in (0, 1e-2)");
  width_ = std::clamp(static_cast<int>(std::ceil(std::log10(1.0 / eps))) + 1, 2, 16);
  beta_ = 2.30 * width_;
  nf_ = next_smooth(std::max(2 * (2 * L_ + 1), 2 * width_));

  const double limit = std::numbers::pi * (1.0 + 1e-12);
  x_.resize(targets.size());
  y_.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    x_[t] = c * targets.ux[t] / L_;
    y_[t] = c * targets.uy[t] / L_;
    if (std::fabs(x_[t]) > limit || std::fabs(y_[t]) > limit) {
      std::ostringstream msg;
      msg << "nufft target " << t << " outside the supported frequency range (|c u| > pi L)";
      throw ConfigError(msg.str());
    }
  }

  // Fourier transform of the kernel on [-1, 1] by Gauss-Legendre; h^2 / (psi_hat(kx) psi_hat(ky)) factorizes.
  const GaussLegendre gl = gauss_legendre(200);
  const double h = 2.0 * std::numbers::pi / nf_;
  correction_.resize(2 * L_ + 1);
  for (int k = -L_; k <= L_; ++k) {
    const double a = k * h * width_ / 2.0;
    long double s = 0.0L;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = gl.nodes[i];
      s += gl.weights[i] * std::exp(beta_ * (std::sqrt(1.0 - z * z) - 1.0)) * std::cos(a * z);
    }
    correction_[k + L_] = (2.0 / width_) / static_cast<double>(s);
  }

  // Kernel weights per target. The spreading window starts at grid index ceil(g - w/2);
  // indices are shifted by width_ into a grid padded on both sides, so no wrapping is needed.
  const double inv_h = nf_ / (2.0 * std::numbers::pi);
  const double half = width_ / 2.0;
  auto kernel = [&](double t) {
    const double z = t / half;
    const double s = 1.0 - z * z;
    return s > 0.0 ? std::exp(beta_ * (std::sqrt(s) - 1.0)) : 0.0;
  };
  const std::size_t nt = x_.size();
  start_x_.resize(nt);
  start_y_.resize(nt);
  wx_.resize(nt * 2 * width_);
  wy_.resize(nt * width_);
  for (std::size_t t = 0; t < nt; ++t) {
    const double gx = x_[t] * inv_h, gy = y_[t] * inv_h;
    const int lx = static_cast<int>(std::ceil(gx - half));
    const int ly = static_cast<int>(std::ceil(gy - half));
    start_x_[t] = (lx % nf_ + nf_) % nf_ + pad_offset();
    start_y_[t] = (ly % nf_ + nf_) % nf_ + pad_offset();
    for (int i = 0; i < width_; ++i) {
      const double kx = kernel(gx - (lx + i));
      wx_[t * 2 * width_ + 2 * i] = kx;
      wx_[t * 2 * width_ + 2 * i + 1] = kx;
      wy_[t * width_ + i] = kernel(gy - (ly + i));
    }
  }

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(nf_) * nf_);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  std::lock_guard lock(detail::fftw_planner_mutex());
  fft_->plan = fftw_plan_dft_2d(nf_, nf_, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fft_->plan) throw NumericalError("fftw plan creation failed");
}

NufftPlan::~NufftPlan() = default;

void NufftPlan::execute(std::span<const double> image, std::span<std::complex<double>> out) const {
  check_image(image, grid_.side());
  if (out.size() != x_.size()) throw ConfigError("nufft output size does not match target count");
  const std::size_t nf = static_cast<std::size_t>(nf_);
  std::vector<std::complex<double>> fine(nf * nf, 0.0);
  // row index: ky mod nf, column index: kx mod nf
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const int kx = grid_.kx()[p], ky = grid_.ky()[p];
    const std::size_t row = static_cast<std::size_t>((ky + nf_) % nf_);
    const std::size_t col = static_cast<std::size_t>((kx + nf_) % nf_);
    fine[row * nf + col] = image[grid_.pixel()[p]] * correction_[kx + L_] * correction_[ky + L_];
  }
  auto* buf = reinterpret_cast<fftw_complex*>(fine.data());
  fftw_execute_dft(fft_->plan, buf, buf);

  // Periodic copy with a margin of pad_offset() on each side, stored as interleaved doubles.
  const int off = pad_offset();
  const std::size_t np = nf + 2 * static_cast<std::size_t>(off);
  std::vector<double> padded(np * np * 2);
  for (std::size_t r = 0; r < np; ++r) {
    const std::size_t src_r = static_cast<std::size_t>(((static_cast<int>(r) - off) % nf_ + nf_) % nf_);
    double* dst = padded.data() + r * np * 2;
    const double* src = reinterpret_cast<const double*>(fine.data() + src_r * nf);
    for (std::size_t q = 0; q < np; ++q) {
      const std::size_t src_q = static_cast<std::size_t>(((static_cast<int>(q) - off) % nf_ + nf_) % nf_);
      dst[2 * q] = src[2 * src_q];
      dst[2 * q + 1] = src[2 * src_q + 1];
    }
  }

  const int w2 = 2 * width_;
  std::vector<double> acc(static_cast<std::size_t>(w2));
  for (std::size_t t = 0; t < x_.size(); ++t) {
    const double* wx = wx_.data() + t * w2;
    const double* wy = wy_.data() + t * width_;
    std::fill(acc.begin(), acc.end(), 0.0);
    const double* base = padded.data() + (static_cast<std::size_t>(start_y_[t]) * np + start_x_[t]) * 2;
    for (int j = 0; j < width_; ++j) {
      const double* line = base + static_cast<std::size_t>(j) * np * 2;
      const double y = wy[j];
      for (int k = 0; k < w2; ++k) acc[k] += y * wx[k] * line[k];
    }
    double re = 0.0, im = 0.0;
    for (int i = 0; i < width_; ++i) {
      re += acc[2 * i];
      im += acc[2 * i + 1];
    }
    out[t] = {re, im};
  }
}

std::vector<std::complex<double>> NufftPlan::operator()(std::span<const double> image) const {
  std::vector<std::complex<double>> out(x_.size());
  execute(image, out);
  return out;
}

std::vector<std::complex<double>> phi_fast(std::span<const double> image, int side, const PolarTargetSet& targets,
                                           double c, double eps) {
  NufftPlan plan(side, targets, c, eps);
  return plan(image);
}

}  // namespace spca
