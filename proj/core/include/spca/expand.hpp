#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spca/disk_grid.hpp"
#include "spca/nufft.hpp"
#include "spca/pswf_basis.hpp"
#include "spca/quadrature.hpp"

namespace spca {

// M square images of side H = W, stored image after image in row-major order.
struct ImageStack {
  int count = 0;
  int side = 0;
  std::vector<double> pixels;
  std::string provenance;

  static ImageStack zeros(int count, int side);
  int L() const { return DiskGrid::rate_for_side(side); }
  std::size_t pixels_per_image() const { return static_cast<std::size_t>(side) * side; }
  std::span<const double> image(std::size_t m) const;
  std::span<double> image(std::size_t m);
  // Throws on inconsistent sizes or non-finite values.
  void validate() const;
};

enum class ExpansionMethod : std::uint32_t { Direct = 0, Fast = 1 };

// Expansion coefficients over the N >= 0 half of the truncation set, one column per image.
// For real images the N < 0 half follows from a_{-N,n} = (-1)^N conj(a_{N,n}), and the pair
// contributes 2 Re(a_{N,n} psi_hat_{N,n}) to the image.
struct CoefficientSet {
  std::uint64_t basis_hash = 0;
  ExpansionMethod method = ExpansionMethod::Direct;
  int side = 0;
  double residual_bound = 0.0;
  std::vector<BasisIndex> indices;
  Eigen::MatrixXcd values;  // |indices| x M

  std::size_t count() const { return static_cast<std::size_t>(values.cols()); }
  std::uint64_t hash() const;
};

CoefficientSet expand_direct(const ImageStack& stack, const PswfBasis& basis);

struct FastOptions {
  double eps_nufft = 1e-12;
  bool sparsify = true;  // drop radial values below 1e-12
};

// Precomputed state of the quadrature-based expansion for one image side.
class FastExpander {
 public:
  FastExpander(const PswfBasis& basis, const QuadratureRule& rule, int side, const FastOptions& options = {});
  ~FastExpander();

  void expand(std::span<const double> image, std::span<std::complex<double>> out) const;
  CoefficientSet expand(const ImageStack& stack) const;

  // Ring sums C_l^N for every ring and every bin (ring by ring), for testing.
  std::vector<std::complex<double>> ring_sums(std::span<const double> image) const;
  std::size_t kept_terms() const { return factor_.size(); }
  std::size_t dense_terms() const { return basis_->size() * rule_.rings(); }

 private:
  const PswfBasis* basis_;
  QuadratureRule rule_;
  int side_;
  FastOptions options_;
  PolarTargetSet targets_;
  std::unique_ptr<NufftPlan> nufft_;
  struct RingFfts;
  std::unique_ptr<RingFfts> ffts_;
  std::vector<std::size_t> row_start_;  // CSR over basis indices
  std::vector<std::size_t> slot_;       // flat position of C_l^N in the ring-sum buffer
  std::vector<double> factor_;
};

CoefficientSet expand_fast(const ImageStack& stack, const PswfBasis& basis, const QuadratureRule& rule,
                           const FastOptions& options = {});

// Image m rebuilt on its side x side grid; zero outside the disk.
std::vector<double> reconstruct_image(const CoefficientSet& coeffs, const PswfBasis& basis, std::size_t m);
ImageStack reconstruct_stack(const CoefficientSet& coeffs, const PswfBasis& basis);

// a_{N,n} exp(-i N phi): coefficients of the image rotated by phi.
Eigen::VectorXcd rotate_coefficients(const Eigen::VectorXcd& coeffs, std::span<const BasisIndex> indices, double phi);

// (eps + delta_c / 2 pi)(T + 4)
double expansion_error_bound(double eps_space, double delta_c, double T);

}  // namespace spca
