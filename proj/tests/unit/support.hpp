#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "spca/expand.hpp"
#include "spca/pswf_basis.hpp"
#include "spca/quadrature.hpp"

namespace spca::testing {

// Built once per test binary.
inline const PswfBasis& basis_for(int L, double T = 10.0) {
  struct Entry {
    int L;
    double T;
    PswfBasis basis;
  };
  static std::vector<std::unique_ptr<Entry>> cache;
  for (const auto& e : cache) {
    if (e->L == L && e->T == T) return e->basis;
  }
  cache.push_back(std::make_unique<Entry>(Entry{L, T, PswfBasis::build(BandParams::nyquist(L, 1.0, T))}));
  return cache.back()->basis;
}

inline const QuadratureRule& rule_for(int L, double T = 10.0) {
  struct Entry {
    int L;
    double T;
    QuadratureRule rule;
  };
  static std::vector<std::unique_ptr<Entry>> cache;
  for (const auto& e : cache) {
    if (e->L == L && e->T == T) return e->rule;
  }
  const PswfBasis& basis = basis_for(L, T);
  cache.push_back(std::make_unique<Entry>(Entry{L, T, build_rule(basis, basis.params().theta_q)}));
  return cache.back()->rule;
}

inline ImageStack random_stack(int count, int side, std::uint64_t seed) {
  ImageStack stack = ImageStack::zeros(count, side);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (double& p : stack.pixels) p = normal(rng);
  return stack;
}

inline Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = {normal(rng), normal(rng)};
  }
  return m;
}

// Random coefficients for real images, decaying with N + n; N = 0 entries real.
inline spca::CoefficientSet random_coefficients(const PswfBasis& basis, int count, int side, std::uint64_t seed) {
  CoefficientSet cs;
  cs.basis_hash = basis.hash();
  cs.side = side;
  cs.indices = basis.indices();
  cs.values = random_complex(static_cast<Eigen::Index>(basis.size()), count, seed);
  const double L = basis.params().L;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [N, n] = basis.indices()[i];
    const double s = std::exp(-(N + n) / (0.25 * L));
    cs.values.row(static_cast<Eigen::Index>(i)) *= s;
    if (N == 0) cs.values.row(static_cast<Eigen::Index>(i)).imag().setZero();
  }
  return cs;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace spca::testing
