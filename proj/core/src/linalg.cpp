#include "spca/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spca/error.hpp"

namespace spca {
namespace {

struct Tridiagonal {
  std::vector<double> d, e, tau;
};

Tridiagonal tridiagonalize(Eigen::MatrixXd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Tridiagonal t;
  t.d.resize(n);
  t.e.resize(std::max<lapack_int>(n, 1));
  t.tau.resize(std::max<lapack_int>(n - 1, 1));
  if (n == 0) return t;
  const lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, t.d.data(), t.e.data(), t.tau.data());
  if (info != 0) throw NumericalError("dsytrd failed", static_cast<double>(info));
  return t;
}

// Bisection plus inverse iteration; used when MRRR rejects tight clusters.
void tridiagonal_vectors_stein(const Tridiagonal& t, lapack_int il, lapack_int iu, Eigen::VectorXd& w,
                               Eigen::MatrixXd& z) {
  const lapack_int n = static_cast<lapack_int>(t.d.size());
  std::vector<double> e(t.e.begin(), t.e.begin() + std::max<lapack_int>(n - 1, 0));
  e.push_back(0.0);
  std::vector<double> wall(n);
  std::vector<lapack_int> iblock(n), isplit(n);
  lapack_int m = 0, nsplit = 0;
  lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, il, iu, 0.0, t.d.data(), e.data(), &m, &nsplit,
                                   wall.data(), iblock.data(), isplit.data());
  if (info != 0) throw NumericalError("dstebz failed (info " + std::to_string(info) + ")", static_cast<double>(info));
  z.resize(n, m);
  std::vector<lapack_int> ifail(std::max<lapack_int>(m, 1));
  info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, t.d.data(), e.data(), m, wall.data(), iblock.data(), isplit.data(),
                        z.data(), n, ifail.data());
  if (info != 0) throw NumericalError("dstein failed (info " + std::to_string(info) + ")", static_cast<double>(info));
  // dstebz with order 'B' groups by split block; restore ascending order
  std::vector<lapack_int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](lapack_int a, lapack_int b) { return wall[a] < wall[b]; });
  w.resize(m);
  Eigen::MatrixXd zs(n, m);
  for (lapack_int i = 0; i < m; ++i) {
    w(i) = wall[order[i]];
    zs.col(i) = z.col(order[i]);
  }
  z = std::move(zs);
}

void tridiagonal_vectors(const Tridiagonal& t, lapack_int il, lapack_int iu, Eigen::VectorXd& w, Eigen::MatrixXd& z) {
  const lapack_int n = static_cast<lapack_int>(t.d.size());
  const lapack_int k = iu - il + 1;
  std::vector<double> d = t.d;
  std::vector<double> e(n);
  std::copy(t.e.begin(), t.e.begin() + std::max<lapack_int>(n - 1, 0), e.begin());
  w.resize(n);
  z.resize(n, k);
  std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(k, 1));
  lapack_int m = 0;
  lapack_logical tryrac = 1;
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, il, iu, &m,
                                         w.data(), z.data(), n, k, isuppz.data(), &tryrac);
  if (info != 0 || m != k) {
    tridiagonal_vectors_stein(t, il, iu, w, z);
    return;
  }
  w.conservativeResize(k);
}

}  // namespace

SymmetricEigen symmetric_eigen_above(Eigen::MatrixXd a, double abs_floor, double rel_floor) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  if (n == 0) return out;
  Tridiagonal t = tridiagonalize(a);

  std::vector<double> ev = t.d;
  std::vector<double> ee(t.e.begin(), t.e.begin() + (n - 1));
  ee.push_back(0.0);
  if (LAPACKE_dsterf(n, ev.data(), ee.data()) != 0) throw NumericalError("dsterf failed");
  const double spectral = std::max(std::fabs(ev.front()), std::fabs(ev.back()));
  const double floor = std::max(abs_floor, rel_floor * spectral);

  const lapack_int neg = static_cast<lapack_int>(std::count_if(ev.begin(), ev.end(), [&](double v) { return v < -floor; }));
  const lapack_int pos = static_cast<lapack_int>(std::count_if(ev.begin(), ev.end(), [&](double v) { return v > floor; }));
  const lapack_int k = neg + pos;
  if (k == 0) return out;

  // Both ends in one call: vectors from separate subset calls lose orthogonality across a cluster near the floor.
  Eigen::VectorXd w;
  Eigen::MatrixXd z;
  if (neg > 0 && pos > 0) {
    Eigen::VectorXd wall;
    Eigen::MatrixXd zall;
    tridiagonal_vectors(t, 1, n, wall, zall);
    w.resize(k);
    z.resize(n, k);
    w.head(neg) = wall.head(neg);
    z.leftCols(neg) = zall.leftCols(neg);
    w.tail(pos) = wall.tail(pos);
    z.rightCols(pos) = zall.rightCols(pos);
  } else if (neg > 0) {
    tridiagonal_vectors(t, 1, neg, w, z);
  } else {
    tridiagonal_vectors(t, n - pos + 1, n, w, z);
  }
  const lapack_int info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, k, a.data(), n, t.tau.data(), z.data(), n);
  if (info != 0) throw NumericalError("dormtr failed", static_cast<double>(info));

  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double ai = std::fabs(w(i)), aj = std::fabs(w(j));
    if (ai != aj) return ai > aj;
    return w(i) > w(j);
  });
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (lapack_int i = 0; i < k; ++i) {
    out.values(i) = w(order[i]);
    out.vectors.col(i) = z.col(order[i]);
  }
  return out;
}

Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  Tridiagonal t = tridiagonalize(a);
  std::vector<double> ee(t.e.begin(), t.e.begin() + (n - 1));
  ee.push_back(0.0);
  if (LAPACKE_dsterf(n, t.d.data(), ee.data()) != 0) throw NumericalError("dsterf failed");
  return Eigen::Map<Eigen::VectorXd>(t.d.data(), n);
}

}  // namespace spca
