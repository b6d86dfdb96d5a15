#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "spca/band_params.hpp"
#include "spca/radial.hpp"

namespace spca {

class PswfBasis;

// Polar rule for functions of bandlimit 2c on the unit disk. Node (l, j) sits at
// radius radial_nodes[l], angle 2 pi j / angular_counts[l], j = 0..N_theta-1,
// with weight (2 pi / N_theta) * r_l * radial_weights[l].
struct QuadratureRule {
  double bandlimit = 0.0;  // 2c
  double theta_q = 0.0;
  std::vector<double> radial_nodes;
  std::vector<double> radial_weights;
  std::vector<int> angular_counts;
  std::uint64_t basis_hash = 0;

  std::size_t rings() const { return radial_nodes.size(); }
  std::size_t total_nodes() const;
  std::vector<std::size_t> ring_offsets() const;  // size rings()+1
  double node_weight(std::size_t ring) const;
  std::uint64_t hash() const;
};

// ceil(c r e + log(1/theta_q) + log(2) + 1): angular nodes on a ring of radius r.
int angular_count(double c, double r, double theta_q);

// Smallest count n <= angular_count(c, r, theta_q) with
// sum_{|j| >= n} |J_j(2 c r)| < theta_q.
int angular_count_refined(double c, double r, double theta_q);

// Tail of the radial exactness condition over k > 2 n_r, restricted to
// eigenpairs above the numerical resolution of their grid:
// sum (|lambda_k| / bandlimit) ||R_k||_inf ||R_k sqrt(r)||_inf * (1 + weight_sum).
double radial_tail(std::span<const RadialEigenpair> system2c, double bandlimit, int n_r, double weight_sum);

// Number of eigenpairs above n_grid * eps * max|lambda|.
std::size_t resolved_count(std::span<const RadialEigenpair> system2c);

// Smallest n_r >= ceil(c / pi) whose tail (with weight sum 1) is below theta_q.
int radial_count(double c, double theta_q, std::span<const RadialEigenpair> system2c);

struct RadialRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double residual = 0.0;  // max moment mismatch
};

// Nodes and weights integrating u_k(r) r dr exactly for the leading 2 n_r radial
// functions u_k of system2c (N = 0, bandlimit 2c). Newton iteration seeded at the
// roots of R^{c}_{0, n_r + 1} taken from system_c.
RadialRule generalized_gaussian_rule(int n_r, std::span<const RadialEigenpair> system2c,
                                     std::span<const RadialEigenpair> system_c);

// max over rho in [0,1] of |sum_l W_l r_l J_0(b r_l rho) - J_1(b rho)/(b rho)|, b = bandlimit:
// the radial integral of the angular mean of exp(i b rho r cos(theta)).
double radial_validation_error(std::span<const double> nodes, std::span<const double> weights, double bandlimit);

struct RuleOptions {
  bool refine_angular = true;
  int max_extra_radial = 8;
};

// Full rule for bandlimit 2c. system2c: N = 0 eigenpairs at bandlimit 2c.
QuadratureRule build_rule(const BandParams& params, std::span<const RadialEigenpair> system2c,
                          const RuleOptions& options = {});
// Same, computing the 2c system and recording the basis hash.
QuadratureRule build_rule(const PswfBasis& basis, double theta_q, const RuleOptions& options = {});

// sum_{l,j} W_{l,j} samples(l,j), samples ordered ring by ring.
std::complex<double> integrate_bandlimited(const QuadratureRule& rule, std::span<const std::complex<double>> samples);

// Moment mismatch sum_l W_l u_k(r_l) r_l - int u_k r dr for each 2c radial function.
std::vector<double> moment_residuals(const QuadratureRule& rule, std::span<const RadialEigenpair> system2c);

}  // namespace spca
