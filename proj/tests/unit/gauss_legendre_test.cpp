#include "spca/gauss_legendre.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

namespace {

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 17, 64}) {
    const auto rule = spca::gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(GaussLegendre, NodesAscendingAndMapped) {
  const auto rule = spca::gauss_legendre(30, 0.0, 1.0);
  ASSERT_EQ(rule.nodes.size(), 30u);
  for (int i = 1; i < 30; ++i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
  EXPECT_GT(rule.nodes.front(), 0.0);
  EXPECT_LT(rule.nodes.back(), 1.0);
  EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 1.0, 1e-15);
}

TEST(GaussLegendre, LargeRuleIntegratesOscillation) {
  const auto rule = spca::gauss_legendre(400, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::cos(300.0 * rule.nodes[i]);
  EXPECT_NEAR(s, std::sin(300.0) / 300.0, 1e-15);
}

TEST(BarycentricInterpolator, ReproducesPolynomialsAndDerivatives) {
  const auto rule = spca::gauss_legendre(12, 0.0, 1.0);
  const spca::BarycentricInterpolator interp(rule, 0.0, 1.0);
  auto f = [](double x) { return 3.0 * std::pow(x, 11) - x * x + 0.5; };
  auto df = [](double x) { return 33.0 * std::pow(x, 10) - 2.0 * x; };
  std::vector<double> values;
  for (double x : rule.nodes) values.push_back(f(x));
  const std::vector<double> points = {0.0, 0.13, 0.5, rule.nodes[3], 0.999, 1.0};
  const Eigen::MatrixXd m = interp.matrix(points);
  const Eigen::MatrixXd d = interp.derivative_matrix(points);
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), values.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_NEAR(interp(values, points[i]), f(points[i]), 1e-13);
    EXPECT_NEAR((m.row(i) * v)(0), f(points[i]), 1e-13);
    EXPECT_NEAR((d.row(i) * v)(0), df(points[i]), 1e-10);
  }
}

}  // namespace
