#include "spca/pswf_basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spca/hash.hpp"

namespace spca {

bool passes_truncation(std::complex<double> lambda, double T) {
  const double s = std::norm(lambda);
  if (s >= 1.0) return true;
  return std::sqrt(s / (1.0 - s)) > T;
}

double cardinality_estimate(double c, double T) {
  return c * c / 4.0 - 2.0 / (std::numbers::pi * std::numbers::pi) * c * std::log(c) * std::log(T);
}

std::vector<BasisIndex> build_index_set(const BandParams& params,
                                        const std::vector<std::vector<RadialEigenpair>>& per_order) {
  std::vector<BasisIndex> out;
  for (std::size_t N = 0; N < per_order.size(); ++N) {
    for (const auto& p : per_order[N]) {
      if (passes_truncation(p.lambda, params.T)) out.push_back({static_cast<int>(N), p.n});
    }
  }
  if (out.empty()) {
    std::ostringstream msg;
    msg << "truncation set is empty for c=" << params.c << ", T=" << params.T;
    throw EmptyBasisError(msg.str());
  }
  return out;
}

PswfBasis::PswfBasis(BandParams params, std::vector<RadialEigenpair> eigenpairs)
    : params_(params), pairs_(std::move(eigenpairs)) {
  if (pairs_.empty()) throw EmptyBasisError("basis has no functions");
  const int n = pairs_.front().grid->size();
  int N = -1;
  int expect_n = 1;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (p.grid->size() != n) throw ConfigError("basis eigenpairs use different radial grids");
    if (p.N != N) {
      if (p.N < N || p.n != 1) throw ConfigError("basis eigenpairs must be ordered by N then n");
      for (int skipped = N + 1; skipped < p.N; ++skipped) {
        offsets_.push_back(i);
        n_max_.push_back(0);
      }
      N = p.N;
      expect_n = 1;
      offsets_.push_back(i);
      n_max_.push_back(0);
    }
    if (p.n != expect_n) throw ConfigError("basis radial indices must run 1..n_max");
    ++expect_n;
    ++n_max_.back();
    indices_.push_back({p.N, p.n});
  }

  Fnv1a h;
  h.value(params_.L);
  h.value(params_.c);
  h.value(params_.T);
  for (const auto& p : pairs_) {
    h.value(p.N);
    h.value(p.n);
    h.value(p.beta);
    h.values(std::span<const double>(p.grid->nodes()));
    h.values(std::span<const double>(p.values));
  }
  hash_ = h.digest();
}

PswfBasis PswfBasis::build(const BandParams& params, const BasisBuildOptions& options) {
  params.validate();
  if (options.check_resolution) check_radial_resolution(0, params);

  RadialOptions ro = options.radial;
  const double threshold = params.T / std::sqrt(1.0 + params.T * params.T);
  ro.lambda_floor = std::max(ro.lambda_floor, 0.5 * threshold);

  std::vector<RadialEigenpair> kept;
  int empty_run = 0;
  solve_radial_sweep(0, params.c, ro, [&](int, std::vector<RadialEigenpair>&& pairs) {
    std::size_t passing = 0;
    while (passing < pairs.size() && passes_truncation(pairs[passing].lambda, params.T)) ++passing;
    if (passing == 0) return ++empty_run < 2;  // first empty order plus one guard order
    empty_run = 0;
    for (std::size_t k = 0; k < passing; ++k) kept.push_back(std::move(pairs[k]));
    return true;
  });
  if (kept.empty()) {
    std::ostringstream msg;
    msg << "truncation set is empty for c=" << params.c << ", T=" << params.T;
    throw EmptyBasisError(msg.str());
  }
  return PswfBasis(params, std::move(kept));
}

std::size_t PswfBasis::full_cardinality() const {
  return n_max(0) + 2 * (size() - static_cast<std::size_t>(n_max(0)));
}

std::complex<double> PswfBasis::sample_scale(std::size_t i) const {
  const double s = params_.c / (2.0 * std::numbers::pi * params_.L) / std::sqrt(2.0 * std::numbers::pi);
  return s * pairs_[i].alpha;
}

double PswfBasis::coefficient_weight(std::size_t i) const {
  const double s = params_.c / (2.0 * std::numbers::pi * params_.L);
  return s * s * std::norm(pairs_[i].alpha);
}

Eigen::MatrixXd PswfBasis::radial_at(std::span<const double> radii) const {
  std::vector<const RadialEigenpair*> ptrs;
  ptrs.reserve(pairs_.size());
  for (const auto& p : pairs_) ptrs.push_back(&p);
  return radial_values(ptrs, radii);
}

}  // namespace spca
