#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spca/band_params.hpp"
#include "spca/gauss_legendre.hpp"

namespace spca {

// Gauss-Legendre grid on [0,1] used to discretize the radial integral operator.
class RadialGrid {
 public:
  explicit RadialGrid(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const BarycentricInterpolator& interpolator() const { return interp_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  BarycentricInterpolator interp_;
};

// Default grid size for bandlimit c: 4 * ceil(2c/pi + 30).
int nystrom_grid_size(double c);

struct RadialEigenpair {
  int N = 0;
  int n = 1;
  double beta = 0.0;
  std::complex<double> alpha;
  std::complex<double> lambda;
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;  // R_{N,n} at the grid nodes

  double abs_lambda() const { return std::abs(lambda); }
  // R_{N,n}(r) on [0,1]; zero at r = 0 for N != 0.
  double operator()(double r) const;
};

// 2*pi*i^N*beta
std::complex<double> eigen_relation(double beta, int N);

struct RadialOptions {
  int grid_size = 0;             // 0: nystrom_grid_size(c)
  double relative_floor = 1e-16; // keep |lambda| > relative_floor * max|lambda|
  double lambda_floor = 0.0;     // and |lambda| > lambda_floor
};

// Eigenpairs of r -> int_0^1 R(rho) J_N(c r rho) rho d rho, ordered by
// non-increasing |beta|, normalized to int R^2 r dr = 1, sign fixed by the
// first grid value with |R| > 1e-8 being positive.
std::vector<RadialEigenpair> solve_radial(int N, double c, const RadialOptions& options = {});
std::vector<RadialEigenpair> solve_radial(int N, const BandParams& params, const RadialOptions& options = {});

// Solves N = first, first+1, ... sharing Bessel evaluations across orders.
// keep_going(N, pairs) is called in order of N; returning false stops the sweep.
void solve_radial_sweep(int first, double c, const RadialOptions& options,
                        const std::function<bool(int, std::vector<RadialEigenpair>&&)>& keep_going);

// Largest change in |lambda| between the default grid and a grid twice as
// fine, over eigenvalues retained at both. Throws NumericalError carrying the
// achieved change if it exceeds params.eps_nystrom.
double check_radial_resolution(int N, const BandParams& params);

// Values of several radial functions sharing one grid at arbitrary radii:
// result(i, k) = R_k(points[i]).
Eigen::MatrixXd radial_values(std::span<const RadialEigenpair* const> pairs, std::span<const double> points);

}  // namespace spca
