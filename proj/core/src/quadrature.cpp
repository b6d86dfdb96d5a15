#include "spca/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spca/bessel.hpp"
#include "spca/error.hpp"
#include "spca/hash.hpp"
#include "spca/pswf_basis.hpp"

namespace spca {
namespace {

// ||R||_inf and ||R sqrt(r)||_inf from grid values plus the interval end points.
std::pair<double, double> sup_norms(const RadialEigenpair& p) {
  const auto& x = p.grid->nodes();
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a = std::max(a, std::fabs(p.values[i]));
    b = std::max(b, std::fabs(p.values[i]) * std::sqrt(x[i]));
  }
  const double end = std::fabs(p(1.0));
  a = std::max({a, end, std::fabs(p(0.0))});
  b = std::max(b, end);
  return {a, b};
}

std::vector<double> sign_change_roots(const RadialEigenpair& f) {
  const auto& x = f.grid->nodes();
  std::vector<double> pts;
  pts.reserve(x.size() + 2);
  pts.push_back(0.0);
  pts.insert(pts.end(), x.begin(), x.end());
  pts.push_back(1.0);
  std::vector<double> roots;
  double fa = f(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double fb = f(pts[i]);
    if (fa == 0.0) {
      if (pts[i - 1] > 0.0) roots.push_back(pts[i - 1]);
    } else if (fa * fb < 0.0) {
      double lo = pts[i - 1], hi = pts[i], flo = fa;
      for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon(); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    fa = fb;
  }
  return roots;
}

}  // namespace

std::size_t QuadratureRule::total_nodes() const {
  std::size_t n = 0;
  for (int k : angular_counts) n += static_cast<std::size_t>(k);
  return n;
}

std::vector<std::size_t> QuadratureRule::ring_offsets() const {
  std::vector<std::size_t> off(rings() + 1, 0);
  for (std::size_t l = 0; l < rings(); ++l) off[l + 1] = off[l] + static_cast<std::size_t>(angular_counts[l]);
  return off;
}

double QuadratureRule::node_weight(std::size_t ring) const {
  return 2.0 * std::numbers::pi / angular_counts[ring] * radial_nodes[ring] * radial_weights[ring];
}

std::uint64_t QuadratureRule::hash() const {
  Fnv1a h;
  h.value(bandlimit);
  h.value(theta_q);
  h.value(basis_hash);
  h.values(std::span<const double>(radial_nodes));
  h.values(std::span<const double>(radial_weights));
  h.values(std::span<const int>(angular_counts));
  return h.digest();
}

int angular_count(double c, double r, double theta_q) {
  return static_cast<int>(std::ceil(c * r * std::numbers::e + std::log(1.0 / theta_q) + std::log(2.0) + 1.0));
}

int angular_count_refined(double c, double r, double theta_q) {
  const int upper = angular_count(c, r, theta_q);
  const int top = upper + 40;
  const auto J = bessel_j_orders(2.0 * c * r, top);
  // tail[n] = 2 sum_{j >= n} |J_j|
  double tail = 0.0;
  int best = upper;
  for (int n = top; n >= 1; --n) {
    tail += 2.0 * std::fabs(J[n]);
    if (n <= upper && tail < theta_q) best = n;
    if (tail >= theta_q) break;
  }
  return best;
}

std::size_t resolved_count(std::span<const RadialEigenpair> system2c) {
  if (system2c.empty()) return 0;
  double top = 0.0;
  for (const auto& p : system2c) top = std::max(top, p.abs_lambda());
  const double floor = system2c.front().grid->size() * std::numeric_limits<double>::epsilon() * top;
  std::size_t n = 0;
  for (const auto& p : system2c) n += p.abs_lambda() > floor ? 1 : 0;
  return n;
}

double radial_tail(std::span<const RadialEigenpair> system2c, double bandlimit, int n_r, double weight_sum) {
  const std::size_t resolved = resolved_count(system2c);
  double tail = 0.0;
  for (std::size_t k = 2 * static_cast<std::size_t>(n_r); k < resolved; ++k) {
    const auto [a, b] = sup_norms(system2c[k]);
    tail += system2c[k].abs_lambda() / bandlimit * a * b;
  }
  return tail * (1.0 + weight_sum);
}

int radial_count(double c, double theta_q, std::span<const RadialEigenpair> system2c) {
  const int start = std::max(1, static_cast<int>(std::ceil(c / std::numbers::pi)));
  const int last = static_cast<int>((resolved_count(system2c) + 1) / 2);
  for (int n_r = start; n_r < last; ++n_r) {
    if (radial_tail(system2c, 2.0 * c, n_r, 1.0) < theta_q) return n_r;
  }
  return std::max(start, last);
}

RadialRule generalized_gaussian_rule(int n_r, std::span<const RadialEigenpair> system2c,
                                     std::span<const RadialEigenpair> system_c) {
  const std::size_t K = 2 * static_cast<std::size_t>(n_r);
  if (system2c.size() < K) throw NumericalError("radial quadrature: not enough 2c radial functions for requested order");
  if (system_c.size() < static_cast<std::size_t>(n_r) + 1) throw NumericalError("radial quadrature: not enough seed functions");

  const auto& grid = *system2c.front().grid;
  const int ng = grid.size();
  Eigen::MatrixXd V(ng, static_cast<Eigen::Index>(K));
  Eigen::VectorXd mom(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    V.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(system2c[k].values.data(), ng);
    long double m = 0.0L;
    for (int i = 0; i < ng; ++i) m += static_cast<long double>(grid.weights()[i]) * grid.nodes()[i] * system2c[k].values[i];
    mom(static_cast<Eigen::Index>(k)) = static_cast<double>(m);
  }

  std::vector<double> r = sign_change_roots(system_c[n_r]);
  if (static_cast<int>(r.size()) != n_r) {
    std::ostringstream msg;
    msg << "radial quadrature: seed function has " << r.size() << " roots, expected " << n_r;
    throw NumericalError(msg.str());
  }

  auto eval = [&](const std::vector<double>& pts, Eigen::MatrixXd& f, Eigen::MatrixXd* d) {
    f = grid.interpolator().matrix(pts) * V;  // n_r x K
    if (d) *d = grid.interpolator().derivative_matrix(pts) * V;
  };

  Eigen::MatrixXd f, d;
  eval(r, f, nullptr);
  Eigen::MatrixXd A = (f.array().colwise() * Eigen::Map<const Eigen::ArrayXd>(r.data(), n_r)).transpose();  // K x n_r
  Eigen::VectorXd W = A.colPivHouseholderQr().solve(mom);

  auto residual_of = [&](const std::vector<double>& rr, const Eigen::VectorXd& ww, Eigen::VectorXd& F) {
    Eigen::MatrixXd ff;
    eval(rr, ff, nullptr);
    F = -mom;
    for (int l = 0; l < n_r; ++l) F += ww(l) * rr[l] * ff.row(l).transpose();
    return F.cwiseAbs().maxCoeff();
  };

  Eigen::VectorXd F;
  double res = residual_of(r, W, F);
  double rcond = 1.0;
  for (int it = 0; it < 60; ++it) {
    eval(r, f, &d);
    Eigen::MatrixXd J(K, 2 * n_r);
    for (int l = 0; l < n_r; ++l) {
      J.col(l) = W(l) * (d.row(l).transpose() * r[l] + f.row(l).transpose());
      J.col(n_r + l) = f.row(l).transpose() * r[l];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    rcond = lu.rcond();
    const Eigen::VectorXd dz = lu.solve(-F);

    double step = 1.0;
    bool accepted = false;
    std::vector<double> r_new(n_r);
    Eigen::VectorXd W_new, F_new;
    double res_new = res;
    for (int half = 0; half < 30; ++half, step *= 0.5) {
      for (int l = 0; l < n_r; ++l) r_new[l] = r[l] + step * dz(l);
      bool ordered = r_new.front() > 0.0 && r_new.back() < 1.0;
      for (int l = 1; l < n_r && ordered; ++l) ordered = r_new[l] > r_new[l - 1];
      if (!ordered) continue;
      W_new = W + step * dz.tail(n_r);
      res_new = residual_of(r_new, W_new, F_new);
      if (res_new < res || half == 29) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double move = step * dz.cwiseAbs().maxCoeff();
    const bool stalled = res_new >= res;
    r = r_new;
    W = W_new;
    F = F_new;
    res = std::min(res, res_new);
    if (move < 1e-15 || stalled) break;
  }

  const double scale = std::max(1.0, mom.cwiseAbs().maxCoeff());
  if (!(res <= 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "radial quadrature Newton solve did not converge: moment residual " << res << ", reciprocal condition "
        << rcond;
    throw NumericalError(msg.str(), rcond);
  }
  RadialRule out;
  out.nodes = std::move(r);
  out.weights.assign(W.data(), W.data() + n_r);
  out.residual = res;
  return out;
}

double radial_validation_error(std::span<const double> nodes, std::span<const double> weights, double bandlimit) {
  const int samples = 8 * static_cast<int>(std::ceil(bandlimit / std::numbers::pi)) + 64;
  double worst = 0.0;
  for (int s = 0; s <= samples; ++s) {
    const double rho = static_cast<double>(s) / samples;
    long double sum = 0.0L;
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      sum += static_cast<long double>(weights[l]) * nodes[l] * bessel_j(0, bandlimit * nodes[l] * rho);
    }
    const double x = bandlimit * rho;
    const double exact = rho == 0.0 ? 0.5 : bessel_j(1, x) / x;
    worst = std::max(worst, std::fabs(static_cast<double>(sum) - exact));
  }
  return worst;
}

QuadratureRule build_rule(const BandParams& params, std::span<const RadialEigenpair> system2c, const RuleOptions& options) {
  params.validate();
  if (system2c.empty() || system2c.front().N != 0) throw ConfigError("build_rule: need N = 0 eigenpairs at bandlimit 2c");
  const double c = params.c;
  const auto system_c = solve_radial(0, c);

  int n_r = radial_count(c, params.theta_q, system2c);
  const int last = n_r + options.max_extra_radial;
  RadialRule radial;
  for (;; ++n_r) {
    double tail = 0.0, check = 0.0;
    try {
      radial = generalized_gaussian_rule(n_r, system2c, system_c);
      double wsum = 0.0;
      for (double w : radial.weights) wsum += std::fabs(w);
      tail = radial_tail(system2c, 2.0 * c, n_r, wsum);
      check = radial_validation_error(radial.nodes, radial.weights, 2.0 * c);
      if (tail < params.theta_q && check < params.theta_q) break;
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "radial quadrature could not reach theta_q=" << params.theta_q << " (N_r=" << n_r << "): " << e.what();
      throw NumericalError(msg.str(), e.detail());
    }
    if (n_r >= last) {
      std::ostringstream msg;
      msg << "radial quadrature error " << std::max(tail, check) << " still above " << params.theta_q
          << " at N_r=" << n_r;
      throw NumericalError(msg.str(), std::max(tail, check));
    }
  }

  QuadratureRule rule;
  rule.bandlimit = 2.0 * c;
  rule.theta_q = params.theta_q;
  rule.radial_nodes = std::move(radial.nodes);
  rule.radial_weights = std::move(radial.weights);
  for (double r : rule.radial_nodes) {
    rule.angular_counts.push_back(options.refine_angular ? angular_count_refined(c, r, params.theta_q)
                                                         : angular_count(c, r, params.theta_q));
  }
  return rule;
}

QuadratureRule build_rule(const PswfBasis& basis, double theta_q, const RuleOptions& options) {
  BandParams p = basis.params();
  p.theta_q = theta_q;
  p.validate();
  const auto system2c = solve_radial(0, 2.0 * p.c);
  QuadratureRule rule = build_rule(p, system2c, options);
  rule.basis_hash = basis.hash();
  return rule;
}

std::complex<double> integrate_bandlimited(const QuadratureRule& rule, std::span<const std::complex<double>> samples) {
  if (samples.size() != rule.total_nodes()) {
    std::ostringstream msg;
    msg << "integrate_bandlimited: got " << samples.size() << " samples for a rule with " << rule.total_nodes()
        << " nodes";
    throw ConfigError(msg.str());
  }
  long double re = 0.0L, im = 0.0L;
  std::size_t k = 0;
  for (std::size_t l = 0; l < rule.rings(); ++l) {
    long double ring_re = 0.0L, ring_im = 0.0L;
    for (int j = 0; j < rule.angular_counts[l]; ++j, ++k) {
      ring_re += samples[k].real();
      ring_im += samples[k].imag();
    }
    const long double w = rule.node_weight(l);
    re += w * ring_re;
    im += w * ring_im;
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

std::vector<double> moment_residuals(const QuadratureRule& rule, std::span<const RadialEigenpair> system2c) {
  std::vector<double> out;
  out.reserve(system2c.size());
  for (const auto& p : system2c) {
    const auto& g = *p.grid;
    long double exact = 0.0L, approx = 0.0L;
    for (int i = 0; i < g.size(); ++i) exact += static_cast<long double>(g.weights()[i]) * g.nodes()[i] * p.values[i];
    for (std::size_t l = 0; l < rule.rings(); ++l) {
      approx += static_cast<long double>(rule.radial_weights[l]) * rule.radial_nodes[l] * p(rule.radial_nodes[l]);
    }
    out.push_back(static_cast<double>(approx - exact));
  }
  return out;
}

}  // namespace spca
