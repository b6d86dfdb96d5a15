#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "spca/disk_grid.hpp"

namespace spca {

struct QuadratureRule;

// Evaluation points u in the unit disk, grouped ring by ring (j ascending within a ring).
struct PolarTargetSet {
  std::vector<double> ux, uy;
  std::vector<std::size_t> ring_offsets;  // size rings+1

  std::size_t size() const { return ux.size(); }
  static PolarTargetSet from_rule(const QuadratureRule& rule);
};

// phi(u) = sum over disk pixels of I(k/L) exp(-i c u.k/L). Image is side x side, row-major.
std::vector<std::complex<double>> phi_direct(std::span<const double> image, int side, const PolarTargetSet& targets,
                                             double c);

// Type-2 nonuniform FFT for the same sum. Immutable after construction; execute is thread-safe.
class NufftPlan {
 public:
  NufftPlan(int side, const PolarTargetSet& targets, double c, double eps);
  ~NufftPlan();
  NufftPlan(const NufftPlan&) = delete;
  NufftPlan& operator=(const NufftPlan&) = delete;

  int width() const { return width_; }
  int fine_size() const { return nf_; }
  std::size_t targets() const { return x_.size(); }

  void execute(std::span<const double> image, std::span<std::complex<double>> out) const;
  std::vector<std::complex<double>> operator()(std::span<const double> image) const;

 private:
  int pad_offset() const { return width_ + 1; }

  DiskGrid grid_;
  int L_ = 0;
  int width_ = 0;
  int nf_ = 0;
  double beta_ = 0.0;
  std::vector<double> x_, y_;       // scaled targets in [-pi, pi]
  std::vector<double> correction_;  // per mode index k + L
  std::vector<int> start_x_, start_y_;  // first padded-grid column / row touched by each target
  std::vector<double> wx_, wy_;         // kernel weights, width_ per target (wx_ duplicated per re/im)
  struct FftHandle;
  std::unique_ptr<FftHandle> fft_;
};

std::vector<std::complex<double>> phi_fast(std::span<const double> image, int side, const PolarTargetSet& targets,
                                           double c, double eps);

// Smallest 2^a 3^b 5^c 7^d >= n.
int next_smooth(int n);

}  // namespace spca
