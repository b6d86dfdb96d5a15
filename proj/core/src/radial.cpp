#include "spca/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spca/bessel.hpp"
#include "spca/error.hpp"
#include "spca/linalg.hpp"
#include "spca/parallel.hpp"

namespace spca {
namespace {

constexpr std::size_t kKernelBudgetBytes = std::size_t{256} << 20;

// Lower triangles of sqrt(w_i w_j) J_N(c x_i x_j) sqrt(c x_i x_j) for N in [lo, hi].
std::vector<Eigen::MatrixXd> symmetric_kernels(const RadialGrid& grid, double c, int lo, int hi) {
  const int n = grid.size();
  const int count = hi - lo + 1;
  std::vector<Eigen::MatrixXd> kernels(count, Eigen::MatrixXd::Zero(n, n));
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    std::vector<double> buf(count);
    for (int j = 0; j <= i; ++j) {
      const double z = c * x[i] * x[j];
      bessel_j_range(z, lo, hi, buf);
      const double s = std::sqrt(w[i] * w[j] * z);
      for (int k = 0; k < count; ++k) kernels[k](i, j) = s * buf[k];
    }
  });
  return kernels;
}

std::vector<RadialEigenpair> eigenpairs_from_kernel(Eigen::MatrixXd&& kernel, int N, double c,
                                                    const std::shared_ptr<const RadialGrid>& grid,
                                                    const RadialOptions& options) {
  const double sc = std::sqrt(c);
  SymmetricEigen eig = symmetric_eigen_above(std::move(kernel), options.lambda_floor / sc, options.relative_floor);
  const int n = grid->size();
  const auto& x = grid->nodes();
  const auto& w = grid->weights();
  std::vector<RadialEigenpair> out(static_cast<std::size_t>(eig.values.size()));
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    RadialEigenpair& p = out[k];
    p.N = N;
    p.n = static_cast<int>(k) + 1;
    p.beta = eig.values(k) / sc;
    p.alpha = eigen_relation(p.beta, N);
    p.lambda = (c / (2.0 * std::numbers::pi)) * p.alpha;
    p.grid = grid;
    p.values.resize(n);
    for (int i = 0; i < n; ++i) p.values[i] = eig.vectors(i, k) / (std::sqrt(w[i]) * std::sqrt(x[i]));
    for (int i = 0; i < n; ++i) {
      if (std::fabs(p.values[i]) > 1e-8) {
        if (p.values[i] < 0.0) {
          for (double& v : p.values) v = -v;
        }
        break;
      }
    }
  }
  return out;
}

std::shared_ptr<const RadialGrid> grid_for(double c, const RadialOptions& options) {
  const int n = options.grid_size > 0 ? options.grid_size : nystrom_grid_size(c);
  return std::make_shared<const RadialGrid>(n);
}

}  // namespace

RadialGrid::RadialGrid(int n) {
  GaussLegendre g = gauss_legendre(n, 0.0, 1.0);
  interp_ = BarycentricInterpolator(g, 0.0, 1.0);
  nodes_ = std::move(g.nodes);
  weights_ = std::move(g.weights);
}

int nystrom_grid_size(double c) { return 4 * static_cast<int>(std::ceil(2.0 * c / std::numbers::pi + 30.0)); }

double RadialEigenpair::operator()(double r) const {
  if (r == 0.0 && N != 0) return 0.0;
  return grid->interpolator()(values, r);
}

std::complex<double> eigen_relation(double beta, int N) {
  static const std::complex<double> powers[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  const int m = ((N % 4) + 4) % 4;
  return 2.0 * std::numbers::pi * beta * powers[m];
}

std::vector<RadialEigenpair> solve_radial(int N, double c, const RadialOptions& options) {
  if (N < 0) throw ConfigError("solve_radial: N must be non-negative");
  if (!(c > 0.0)) throw ConfigError("solve_radial: bandlimit must be positive");
  auto grid = grid_for(c, options);
  auto kernels = symmetric_kernels(*grid, c, N, N);
  return eigenpairs_from_kernel(std::move(kernels[0]), N, c, grid, options);
}

std::vector<RadialEigenpair> solve_radial(int N, const BandParams& params, const RadialOptions& options) {
  params.validate();
  return solve_radial(N, params.c, options);
}

void solve_radial_sweep(int first, double c, const RadialOptions& options,
                        const std::function<bool(int, std::vector<RadialEigenpair>&&)>& keep_going) {
  if (first < 0) throw ConfigError("solve_radial_sweep: first order must be non-negative");
  auto grid = grid_for(c, options);
  const std::size_t per_kernel = sizeof(double) * static_cast<std::size_t>(grid->size()) * grid->size();
  const int chunk = static_cast<int>(std::clamp<std::size_t>(kKernelBudgetBytes / per_kernel, 1, 64));
  const int batch = std::max(1, thread_count());

  for (int lo = first;; lo += chunk) {
    auto kernels = symmetric_kernels(*grid, c, lo, lo + chunk - 1);
    for (int b0 = 0; b0 < chunk; b0 += batch) {
      const int b1 = std::min(chunk, b0 + batch);
      std::vector<std::vector<RadialEigenpair>> results(b1 - b0);
      parallel_for(static_cast<std::size_t>(b0), static_cast<std::size_t>(b1), [&](std::size_t k) {
        results[k - b0] = eigenpairs_from_kernel(std::move(kernels[k]), lo + static_cast<int>(k), c, grid, options);
      });
      for (int k = b0; k < b1; ++k) {
        if (!keep_going(lo + k, std::move(results[k - b0]))) return;
      }
    }
  }
}

double check_radial_resolution(int N, const BandParams& params) {
  params.validate();
  RadialOptions coarse;
  RadialOptions fine;
  fine.grid_size = 2 * nystrom_grid_size(params.c);
  const auto a = solve_radial(N, params.c, coarse);
  const auto b = solve_radial(N, params.c, fine);
  const std::size_t m = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::fabs(a[k].abs_lambda() - b[k].abs_lambda()));
  if (worst > params.eps_nystrom) {
    std::ostringstream msg;
    msg << "radial eigenproblem not resolved for N=" << N << ": eigenvalues change by " << worst
        << " under grid refinement (tolerance " << params.eps_nystrom << ")";
    throw NumericalError(msg.str(), worst);
  }
  return worst;
}

Eigen::MatrixXd radial_values(std::span<const RadialEigenpair* const> pairs, std::span<const double> points) {
  if (pairs.empty()) return Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), 0);
  const auto& grid = pairs.front()->grid;
  const int n = grid->size();
  Eigen::MatrixXd V(n, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k]->grid->size() != n) throw ConfigError("radial_values: eigenpairs use different grids");
    V.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(pairs[k]->values.data(), n);
  }
  Eigen::MatrixXd out = grid->interpolator().matrix(points) * V;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] != 0.0) continue;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (pairs[k]->N != 0) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = 0.0;
    }
  }
  return out;
}

}  // namespace spca
