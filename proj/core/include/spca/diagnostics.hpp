#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spca/expand.hpp"
#include "spca/pswf_basis.hpp"
#include "spca/quadrature.hpp"
#include "spca/radial.hpp"
#include "spca/spca_model.hpp"

namespace spca {

struct GramReport {
  int L = 0;
  double c = 0.0;
  double T = 0.0;
  std::size_t size = 0;         // full +-N count
  Eigen::VectorXd eigenvalues;  // ascending
  double max_deviation = 0.0;   // max |1 - nu|
  double predicted = 0.0;       // T^-2
};

// Spectrum of H_c = Psi^* Psi over the disk pixels of a side x side grid (2L+1 when 0),
// with each N > 0 contributing the pair +-N.
GramReport gram_spectrum(const PswfBasis& basis, int side = 0);

struct LambdaSumReport {
  double sum = 0.0;         // sum_k |lambda_{0,k}|^2
  double closed_form = 0.0; // (c^2/4)(J0^2 - J2 J0 + 2 J1^2)
  double asymptote = 0.0;   // c / pi
};

LambdaSumReport lambda_sum_identity(double c, std::span<const RadialEigenpair> n0_pairs);

struct LambdaDecayReport {
  double bandlimit = 0.0;
  int first_small = 0;     // first n (1-based) with |lambda_{0,n}| <= threshold, 0 if none
  double estimate = 0.0;   // bandlimit / pi
  double gap = 0.0;
  bool monotone = true;    // |lambda| non-increasing before first_small
};

LambdaDecayReport lambda_decay_profile(double bandlimit, std::span<const RadialEigenpair> n0_pairs,
                                       double threshold = 1e-12);

struct NodeReport {
  int L = 0;
  std::size_t radial = 0;
  std::size_t total = 0;
  double estimate = 0.0;      // (pi e / 2) L^2
  std::size_t pixels = 0;     // (2L+1)^2
};

NodeReport node_report(const QuadratureRule& rule, int L);

struct CardinalityReport {
  std::size_t full = 0;      // counting +-N
  double landau = 0.0;       // c^2 / 4
  double estimate = 0.0;     // c^2/4 - (2/pi^2) c log(c) log(T)
};

CardinalityReport cardinality_report(const PswfBasis& basis);

// max |G - I| for the pixel-sampled Gram of the first K ranked components.
double component_gram_deviation(const SpcaModel& model, const PswfBasis& basis, std::size_t K, int side = 0);

struct ErrorCurveOptions {
  double eps_space = 0.0;
  double delta_c = 0.0;
};

struct ErrorCurveRow {
  std::size_t K = 0;
  double theoretical = 0.0;       // tail / mean b-space image energy, pairs counted twice
  double empirical = 0.0;         // pixel error / pixel energy over the disk
  double tail_continuous = 0.0;   // tail mapped to L2(D) units: L^2 / min|lambda|^2 times tail
  double error_continuous = 0.0;  // mean L2(D) squared error against the original pixels
  double bound = 0.0;             // total_error_bound(tail_continuous, eps, delta_c, T)
};

std::vector<ErrorCurveRow> error_curve(const ImageStack& stack, const PswfBasis& basis, const CoefficientSet& coeffs,
                                       const SpcaModel& model, std::span<const std::size_t> Ks,
                                       const ErrorCurveOptions& options = {});

}  // namespace spca
