#include "spca/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace spca {
namespace {

constexpr double kBig = 1e100;
constexpr double kRescale = 1e-100;

int start_order(double x, int hi) {
  const double top = std::max(static_cast<double>(hi), std::ceil(x));
  return static_cast<int>(top + 20.0 + std::sqrt(50.0 * top));
}

}  // namespace

void bessel_j_range(double x, int lo, int hi, std::span<double> out) {
  if (lo < 0 || hi < lo) throw std::invalid_argument("bessel_j_range: need 0 <= lo <= hi");
  if (out.size() < static_cast<std::size_t>(hi - lo + 1)) {
    throw std::invalid_argument("bessel_j_range: output span too small");
  }
  const bool negative = x < 0.0;
  x = std::fabs(x);
  if (x == 0.0) {
    for (int k = lo; k <= hi; ++k) out[k - lo] = (k == 0) ? 1.0 : 0.0;
    return;
  }

  const int m = start_order(x, hi);
  const double two_over_x = 2.0 / x;
  double next = 0.0;  // f_{k+1}
  double cur = 1e-30; // f_k, k = m
  double sum_sq = 0.0;
  double sign_sum = 0.0;
  for (int k = lo; k <= hi; ++k) out[k - lo] = 0.0;

  for (int k = m; k >= 0; --k) {
    if (k <= hi && k >= lo) out[k - lo] = cur;
    if (k == 0) {
      sum_sq += cur * cur;
      sign_sum += cur;
    } else {
      sum_sq += 2.0 * cur * cur;
      if ((k & 1) == 0) sign_sum += 2.0 * cur;
    }
    if (k == 0) break;
    const double prev = two_over_x * k * cur - next;
    next = cur;
    cur = prev;
    if (std::fabs(cur) > kBig) {
      cur *= kRescale;
      next *= kRescale;
      sum_sq *= kRescale * kRescale;
      sign_sum *= kRescale;
      for (int j = std::max(lo, k); j <= hi; ++j) out[j - lo] *= kRescale;
    }
  }

  double scale = 1.0 / std::sqrt(sum_sq);
  if (sign_sum < 0.0) scale = -scale;
  for (int k = lo; k <= hi; ++k) {
    double v = out[k - lo] * scale;
    if (negative && (k & 1)) v = -v;
    out[k - lo] = v;
  }
}

std::vector<double> bessel_j_orders(double x, int max_order) {
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1);
  bessel_j_range(x, 0, max_order, out);
  return out;
}

double bessel_j(int n, double x) {
  const int an = std::abs(n);
  double v = 0.0;
  bessel_j_range(x, an, an, std::span<double>(&v, 1));
  if (n < 0 && (an & 1)) v = -v;
  return v;
}

}  // namespace spca
