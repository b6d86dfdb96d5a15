#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spca/expand.hpp"
#include "spca/pswf_basis.hpp"

namespace spca {

// Eigenpairs of one covariance block B^(N), eigenvalues non-increasing.
struct SpcaBlock {
  int N = 0;
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // columns, orthonormal
};

struct ComponentRef {
  int N = 0;
  int local = 0;  // column inside the block
  double value = 0.0;
};

// Rotationally invariant PCA model over the N >= 0 half of the truncation set.
// A component with N > 0 stands for a conjugate pair in the full real-image model.
struct SpcaModel {
  std::uint64_t basis_hash = 0;
  std::uint64_t coeffs_hash = 0;
  int L = 0;
  double c = 0.0;
  Eigen::VectorXcd mean;             // mu_{0,n}, n = 1..n0
  Eigen::VectorXd weights;           // diagonal of A per basis index
  std::vector<std::size_t> offsets;  // first basis index of each block
  std::vector<SpcaBlock> blocks;     // blocks[N]
  std::vector<ComponentRef> ranking;

  std::size_t components() const { return ranking.size(); }
  const SpcaBlock& block_of(std::size_t k) const { return blocks.at(ranking.at(k).N); }
  // Block-local eigenvector of the k-th ranked component (0-based).
  Eigen::VectorXcd eigenvector(std::size_t k) const;
  std::vector<double> eigenvalues() const;
  // Sum of eigenvalues past the first K ranked components; pairs counted twice when full_set.
  double tail(std::size_t K, bool full_set = false) const;
  // Global order: non-increasing value, then N ascending, then block-local index.
  void rank();
};

enum class BlockSolver { Auto, Eigen, Svd };

struct SpcaOptions {
  BlockSolver solver = BlockSolver::Auto;  // Auto uses the SVD when M < block size
};

// (1/M) sum_m a_{0,n}^m over the N = 0 entries.
Eigen::VectorXcd mean_coefficients(const CoefficientSet& coeffs);

// A (a - mu [N = 0]), one column per image.
Eigen::MatrixXcd b_coefficients(const CoefficientSet& coeffs, const Eigen::VectorXcd& mean, const PswfBasis& basis);

// Same, with A and mu taken from a model.
Eigen::MatrixXcd b_coefficients(const CoefficientSet& coeffs, const SpcaModel& model);

// blocks[N] = (1/M) b_N b_N^*
std::vector<Eigen::MatrixXcd> build_blocks(const Eigen::MatrixXcd& b, const PswfBasis& basis);

// Hermitian eigendecomposition with clamping at -1e-14 trace and fixed eigenvector phase.
SpcaBlock eigendecompose_block(int N, const Eigen::MatrixXcd& block);
// Same spectrum from the singular values of b_N / sqrt(M).
SpcaBlock svd_block(int N, const Eigen::MatrixXcd& b_rows);

SpcaModel build_model(const CoefficientSet& coeffs, const PswfBasis& basis, const SpcaOptions& options = {});

// g_k at the pixels of a side x side grid (zero outside the disk), row-major.
std::vector<std::complex<double>> component_image(const SpcaModel& model, const PswfBasis& basis, std::size_t k,
                                                  int side);
// g_k on radii x uniform angles 2 pi j / n_angles.
Eigen::MatrixXcd component_polar(const SpcaModel& model, const PswfBasis& basis, std::size_t k,
                                 std::span<const double> radii, int n_angles);

struct ProjectionSet {
  int K = 0;
  Eigen::MatrixXcd d;  // M x K
};

// d_k^m = sum_n b_{N_k,n}^m conj(g_{N_k,n}^k)
ProjectionSet project(const Eigen::MatrixXcd& b, const SpcaModel& model, std::size_t K);
ProjectionSet project(const CoefficientSet& coeffs, const PswfBasis& basis, const SpcaModel& model, std::size_t K);

// sum_{k<K} d_k^m g_k in b-space (mean removed), |basis| x M.
Eigen::MatrixXcd truncated_b_reconstruction(const SpcaModel& model, const ProjectionSet& proj, std::size_t K);
// Coefficients mu + A^{-1} sum_{k<K} d_k^m g_k, renderable with reconstruct_stack.
CoefficientSet truncated_reconstruction(const SpcaModel& model, const ProjectionSet& proj, std::size_t K,
                                        const PswfBasis& basis, int side = 0);

// tail + 2 E sqrt(tail) + E^2 with E = expansion_error_bound(eps, delta_c, T)
double total_error_bound(double tail, double eps_space, double delta_c, double T);

}  // namespace spca
