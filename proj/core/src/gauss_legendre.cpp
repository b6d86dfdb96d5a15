#include "spca/gauss_legendre.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spca {

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // node i counts down from +1; mirror into ascending order
    g.nodes[n - 1 - i] = mid + half * x;
    g.nodes[i] = mid - half * x;
    g.weights[n - 1 - i] = half * w;
    g.weights[i] = half * w;
  }
  if (n & 1) g.nodes[n / 2] = mid;
  return g;
}

BarycentricInterpolator::BarycentricInterpolator(const GaussLegendre& rule, double a, double b)
    : nodes_(rule.nodes), bary_(rule.nodes.size()) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double t = (nodes_[j] - mid) / half;
    const double w = rule.weights[j] / half;
    const double s = (j & 1) ? -1.0 : 1.0;
    bary_[j] = s * std::sqrt((1.0 - t * t) * w);
  }
}

double BarycentricInterpolator::operator()(std::span<const double> values, double x) const {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double d = x - nodes_[j];
    if (d == 0.0) return values[j];
    const double q = bary_[j] / d;
    num += q * values[j];
    den += q;
  }
  return num / den;
}

Eigen::MatrixXd BarycentricInterpolator::matrix(std::span<const double> points) const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd P(static_cast<Eigen::Index>(points.size()), n);
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const double x = points[i];
    Eigen::Index hit = -1;
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x - nodes_[j];
      if (d == 0.0) {
        hit = j;
        break;
      }
      const double q = bary_[j] / d;
      P(i, j) = q;
      den += q;
    }
    if (hit >= 0) {
      P.row(i).setZero();
      P(i, hit) = 1.0;
    } else {
      P.row(i) /= den;
    }
  }
  return P;
}

Eigen::MatrixXd BarycentricInterpolator::derivative_matrix(std::span<const double> points) const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd D(static_cast<Eigen::Index>(points.size()), n);
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    const double x = points[i];
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x == nodes_[j]) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      double diag = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == hit) continue;
        const double v = (bary_[j] / bary_[hit]) / (nodes_[hit] - nodes_[j]);
        D(i, j) = v;
        diag -= v;
      }
      D(i, hit) = diag;
      continue;
    }
    // p'(x) = sum_j P_j (p(x) - f_j)/(x - x_j)
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) den += bary_[j] / (x - nodes_[j]);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = x - nodes_[j];
      const double pj = bary_[j] / d / den;
      D(i, j) = -pj / d;
      s += pj / d;
    }
    Eigen::VectorXd prow(n);
    for (Eigen::Index j = 0; j < n; ++j) prow(j) = bary_[j] / (x - nodes_[j]) / den;
    D.row(i) += s * prow.transpose();
  }
  return D;
}

}  // namespace spca
