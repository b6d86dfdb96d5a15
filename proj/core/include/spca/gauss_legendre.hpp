#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace spca {

struct GaussLegendre {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
GaussLegendre gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Barycentric interpolation through the nodes of a Gauss-Legendre rule.
class BarycentricInterpolator {
 public:
  BarycentricInterpolator() = default;
  explicit BarycentricInterpolator(const GaussLegendre& rule, double a, double b);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

  double operator()(std::span<const double> values, double x) const;

  // Rows: evaluation points; columns: grid nodes. Multiplying by a matrix of
  // grid values (nodes x functions) gives interpolated values.
  Eigen::MatrixXd matrix(std::span<const double> points) const;
  // Same for the first derivative.
  Eigen::MatrixXd derivative_matrix(std::span<const double> points) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
};

}  // namespace spca
