#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spca/band_params.hpp"
#include "spca/error.hpp"
#include "spca/radial.hpp"

namespace spca {

struct BasisIndex {
  int N = 0;
  int n = 1;
  bool operator==(const BasisIndex&) const = default;
};

class EmptyBasisError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// sqrt(|lambda|^2 / (1 - |lambda|^2)) > T
bool passes_truncation(std::complex<double> lambda, double T);

// c^2/4 - (2/pi^2) c log(c) log(T)
double cardinality_estimate(double c, double T);

// Indices (N >= 0, n) passing the truncation rule, ordered by N then n.
// per_order[N] holds the eigenpairs for angular index N.
std::vector<BasisIndex> build_index_set(const BandParams& params,
                                        const std::vector<std::vector<RadialEigenpair>>& per_order);

struct BasisBuildOptions {
  RadialOptions radial;
  bool check_resolution = true;  // verify N = 0 under grid doubling
};

// Truncated PSWF basis for N >= 0. Immutable once built.
class PswfBasis {
 public:
  // Eigenpairs must be ordered by N then n with n = 1..n_max(N) contiguous.
  PswfBasis(BandParams params, std::vector<RadialEigenpair> eigenpairs);

  static PswfBasis build(const BandParams& params, const BasisBuildOptions& options = {});

  const BandParams& params() const { return params_; }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<BasisIndex>& indices() const { return indices_; }
  const RadialEigenpair& eigenpair(std::size_t i) const { return pairs_[i]; }
  const std::vector<RadialEigenpair>& eigenpairs() const { return pairs_; }
  const std::shared_ptr<const RadialGrid>& grid() const { return pairs_.front().grid; }

  int max_N() const { return static_cast<int>(n_max_.size()) - 1; }
  int n_max(int N) const { return (N >= 0 && N <= max_N()) ? n_max_[N] : 0; }
  const std::vector<int>& n_max_per_N() const { return n_max_; }
  // Position of (N, 1) in the index list.
  std::size_t block_offset(int N) const { return offsets_.at(N); }
  // Cardinality of the full set counting +-N.
  std::size_t full_cardinality() const;

  // psi_hat_i(r, theta) = sample_scale(i) * R_i(r) * exp(i N theta),
  // sample_scale = (c / (2 pi L)) alpha / sqrt(2 pi).
  std::complex<double> sample_scale(std::size_t i) const;
  // (c / (2 pi L))^2 |alpha|^2
  double coefficient_weight(std::size_t i) const;

  // result(p, i) = R_i(radii[p]).
  Eigen::MatrixXd radial_at(std::span<const double> radii) const;

  std::uint64_t hash() const { return hash_; }

 private:
  BandParams params_;
  std::vector<RadialEigenpair> pairs_;
  std::vector<BasisIndex> indices_;
  std::vector<int> n_max_;
  std::vector<std::size_t> offsets_;
  std::uint64_t hash_ = 0;
};

}  // namespace spca
