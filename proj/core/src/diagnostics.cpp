#include "spca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spca/bessel.hpp"
#include "spca/disk_grid.hpp"
#include "spca/error.hpp"
#include "spca/linalg.hpp"

namespace spca {

GramReport gram_spectrum(const PswfBasis& basis, int side) {
  const int L = basis.params().L;
  const DiskGrid grid(side > 0 ? side : 2 * L + 1);
  const Eigen::MatrixXd R = basis.radial_at(grid.unique_radii());
  const auto P = static_cast<Eigen::Index>(grid.size());

  std::size_t cols = 0;
  for (const auto& ix : basis.indices()) cols += ix.N == 0 ? 1 : 2;

  // Column phases drop out of the spectrum, and the pair +-N spans the same
  // space as sqrt(2) |s| R {cos N theta, sin N theta}.
  Eigen::MatrixXd X(P, static_cast<Eigen::Index>(cols));
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const int N = basis.indices()[i].N;
    const double s = std::abs(basis.sample_scale(i));
    for (Eigen::Index p = 0; p < P; ++p) {
      const double v = s * R(grid.radius_slot()[p], static_cast<Eigen::Index>(i));
      if (N == 0) {
        X(p, col) = v;
      } else {
        X(p, col) = std::numbers::sqrt2 * v * std::cos(N * grid.angle()[p]);
        X(p, col + 1) = std::numbers::sqrt2 * v * std::sin(N * grid.angle()[p]);
      }
    }
    col += N == 0 ? 1 : 2;
  }
  Eigen::MatrixXd H(X.cols(), X.cols());
  H.setZero();
  H.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();

  GramReport r;
  r.L = L;
  r.c = basis.params().c;
  r.T = basis.params().T;
  r.size = cols;
  r.eigenvalues = symmetric_eigenvalues(std::move(H));
  for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
    r.max_deviation = std::max(r.max_deviation, std::fabs(1.0 - r.eigenvalues(k)));
  }
  r.predicted = 1.0 / (r.T * r.T);
  return r;
}

LambdaSumReport lambda_sum_identity(double c, std::span<const RadialEigenpair> n0_pairs) {
  LambdaSumReport r;
  for (const auto& p : n0_pairs) {
    if (p.N != 0) throw ConfigError("lambda sum identity needs N = 0 eigenpairs");
    r.sum += std::norm(p.lambda);
  }
  const auto j = bessel_j_orders(c, 2);
  r.closed_form = 0.25 * c * c * (j[0] * j[0] - j[2] * j[0] + 2.0 * j[1] * j[1]);
  r.asymptote = c / std::numbers::pi;
  return r;
}

LambdaDecayReport lambda_decay_profile(double bandlimit, std::span<const RadialEigenpair> n0_pairs, double threshold) {
  LambdaDecayReport r;
  r.bandlimit = bandlimit;
  r.estimate = bandlimit / std::numbers::pi;
  double prev = INFINITY;
  for (std::size_t k = 0; k < n0_pairs.size(); ++k) {
    const double a = n0_pairs[k].abs_lambda();
    if (a <= threshold) {
      r.first_small = static_cast<int>(k) + 1;
      break;
    }
    if (a > prev) r.monotone = false;
    prev = a;
  }
  r.gap = r.first_small > 0 ? r.first_small - r.estimate : INFINITY;
  return r;
}

NodeReport node_report(const QuadratureRule& rule, int L) {
  NodeReport r;
  r.L = L;
  r.radial = rule.rings();
  r.total = rule.total_nodes();
  r.estimate = 0.5 * std::numbers::pi * std::numbers::e * L * L;
  r.pixels = static_cast<std::size_t>(2 * L + 1) * (2 * L + 1);
  return r;
}

CardinalityReport cardinality_report(const PswfBasis& basis) {
  CardinalityReport r;
  r.full = basis.full_cardinality();
  const double c = basis.params().c;
  r.landau = 0.25 * c * c;
  r.estimate = cardinality_estimate(c, basis.params().T);
  return r;
}

double component_gram_deviation(const SpcaModel& model, const PswfBasis& basis, std::size_t K, int side) {
  K = std::min(K, model.components());
  const int s = side > 0 ? side : 2 * model.L + 1;
  std::vector<std::vector<std::complex<double>>> imgs;
  for (std::size_t k = 0; k < K; ++k) imgs.push_back(component_image(model, basis, k, s));
  double dev = 0.0;
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = a; b < K; ++b) {
      std::complex<double> g = 0.0;
      for (std::size_t p = 0; p < imgs[a].size(); ++p) g += std::conj(imgs[a][p]) * imgs[b][p];
      dev = std::max(dev, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  return dev;
}

std::vector<ErrorCurveRow> error_curve(const ImageStack& stack, const PswfBasis& basis, const CoefficientSet& coeffs,
                                       const SpcaModel& model, std::span<const std::size_t> Ks,
                                       const ErrorCurveOptions& options) {
  if (coeffs.count() != static_cast<std::size_t>(stack.count)) throw ConfigError("coefficients do not match stack");
  if (model.basis_hash != basis.hash()) throw ConfigError("model was built with a different basis");
  const int L = basis.params().L;
  const double M = static_cast<double>(stack.count);
  const DiskGrid grid(stack.side);

  double pixel_energy = 0.0;
  for (int m = 0; m < stack.count; ++m) {
    const auto img = stack.image(m);
    for (int p : grid.pixel()) pixel_energy += img[p] * img[p];
  }
  double b_energy = 0.0;
  double min_lambda2 = INFINITY;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double mult = basis.indices()[i].N == 0 ? 1.0 : 2.0;
    const double w = model.weights(static_cast<Eigen::Index>(i));
    b_energy += mult * w * w * coeffs.values.row(static_cast<Eigen::Index>(i)).squaredNorm();
    min_lambda2 = std::min(min_lambda2, std::norm(basis.eigenpair(i).lambda));
  }
  b_energy /= M;

  std::size_t kmax = 0;
  for (auto K : Ks) kmax = std::max(kmax, std::min(K, model.components()));
  const ProjectionSet proj = project(coeffs, basis, model, kmax);

  std::vector<ErrorCurveRow> rows;
  for (auto Kin : Ks) {
    const std::size_t K = std::min(Kin, model.components());
    ErrorCurveRow row;
    row.K = K;
    const double tail = model.tail(K, true);
    row.theoretical = tail / b_energy;
    const ImageStack rec = reconstruct_stack(truncated_reconstruction(model, proj, K, basis, stack.side), basis);
    double err = 0.0;
    for (int m = 0; m < stack.count; ++m) {
      const auto a = stack.image(m);
      const auto b = rec.image(m);
      for (int p : grid.pixel()) err += (a[p] - b[p]) * (a[p] - b[p]);
    }
    row.empirical = err / pixel_energy;
    row.tail_continuous = tail * L * L / min_lambda2;
    row.error_continuous = err / (M * L * L);
    row.bound = total_error_bound(row.tail_continuous, options.eps_space, options.delta_c, basis.params().T);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace spca
