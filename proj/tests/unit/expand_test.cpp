#include "spca/expand.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spca/diagnostics.hpp"
#include "spca/error.hpp"
#include "support.hpp"

namespace {

using std::numbers::pi;
using namespace spca::testing;

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

spca::ImageStack stack_from(const spca::CoefficientSet& cs, const spca::PswfBasis& basis) {
  return spca::reconstruct_stack(cs, basis);
}

TEST(ImageStack, Validation) {
  auto s = spca::ImageStack::zeros(2, 9);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.L(), 4);
  s.pixels[3] = std::nan("");
  EXPECT_THROW(s.validate(), spca::ConfigError);
  s.pixels.pop_back();
  EXPECT_THROW(s.validate(), spca::ConfigError);
}

TEST(ExpandDirect, ZeroAndScaling) {
  const auto& basis = basis_for(16);
  const auto zero = spca::expand_direct(spca::ImageStack::zeros(2, 33), basis);
  EXPECT_EQ(max_abs(zero.values), 0.0);
  auto stack = random_stack(3, 33, 1);
  const auto a = spca::expand_direct(stack, basis);
  for (double& p : stack.pixels) p *= -2.5;
  const auto b = spca::expand_direct(stack, basis);
  EXPECT_LT(max_abs(b.values + 2.5 * a.values), 1e-13 * max_abs(a.values));
  EXPECT_EQ(a.method, spca::ExpansionMethod::Direct);
  EXPECT_EQ(a.basis_hash, basis.hash());
  EXPECT_EQ(a.count(), 3u);
}

TEST(ExpandDirect, RejectsMismatchedSide) {
  EXPECT_THROW(spca::expand_direct(spca::ImageStack::zeros(1, 41), basis_for(16)), spca::ConfigError);
}

// Image = Re psi_hat_j on the grid. Oracle: explicit pixel sums of the sampled functions.
TEST(ExpandDirect, ConcentratesOnSampledFunction) {
  const auto& basis = basis_for(16);
  const spca::DiskGrid grid(33);
  const double dev = spca::gram_spectrum(basis).max_deviation;
  auto psi = [&](std::size_t i, std::size_t p) {
    const auto& e = basis.eigenpair(i);
    return basis.sample_scale(i) * e(grid.radius()[p]) * std::polar(1.0, e.N * grid.angle()[p]);
  };
  for (std::size_t j : {std::size_t{0}, basis.block_offset(3) + 1, basis.block_offset(basis.max_N())}) {
    auto stack = spca::ImageStack::zeros(1, 33);
    for (std::size_t p = 0; p < grid.size(); ++p) stack.pixels[grid.pixel()[p]] = psi(j, p).real();
    const auto a = spca::expand_direct(stack, basis);
    const double mult = basis.indices()[j].N == 0 ? 1.0 : 0.5;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      std::complex<double> oracle = 0.0;
      for (std::size_t p = 0; p < grid.size(); ++p) oracle += psi(j, p).real() * std::conj(psi(i, p));
      EXPECT_NEAR(std::abs(a.values(i, 0) - oracle), 0.0, 1e-13);
      if (i == j) {
        EXPECT_NEAR(a.values(i, 0).real(), mult * std::norm(basis.eigenpair(j).lambda), dev);
      } else {
        EXPECT_LE(std::abs(a.values(i, 0)), dev);
      }
    }
  }
}

TEST(ExpandFast, ZeroImage) {
  const auto& basis = basis_for(16);
  const auto a = spca::expand_fast(spca::ImageStack::zeros(2, 33), basis, rule_for(16));
  EXPECT_EQ(max_abs(a.values), 0.0);
  EXPECT_EQ(a.method, spca::ExpansionMethod::Fast);
  EXPECT_EQ(a.residual_bound, rule_for(16).theta_q);
}

TEST(ExpandFast, AgreesWithDirect) {
  for (int L : {16, 32}) {
    const auto& basis = basis_for(L);
    const auto& rule = rule_for(L);
    const auto stack = random_stack(3, 2 * L + 1, 2);
    const auto direct = spca::expand_direct(stack, basis);
    const auto fast = spca::expand_fast(stack, basis, rule, {.eps_nufft = 2e-15});
    for (int m = 0; m < 3; ++m) {
      const double bound = 10.0 * rule.theta_q * norm2(stack.image(m));
      EXPECT_LE((fast.values.col(m) - direct.values.col(m)).cwiseAbs().maxCoeff(), bound) << "L=" << L;
    }
    const auto loose = spca::expand_fast(stack, basis, rule);
    EXPECT_LT(max_abs(loose.values - direct.values), 1e-10 * max_abs(direct.values));
  }
}

TEST(ExpandFast, EvenSideAgreesWithDirect) {
  const auto& basis = basis_for(16);
  const auto stack = random_stack(2, 32, 3);
  const auto direct = spca::expand_direct(stack, basis);
  const auto fast = spca::expand_fast(stack, basis, rule_for(16), {.eps_nufft = 2e-15});
  EXPECT_LT(max_abs(fast.values - direct.values), 1e-13 * norm2(stack.pixels));
}

// C_l^N from the folded FFT bins against brute-force angular sums over unfolded N.
TEST(FastExpander, RingSumsFoldIndices) {
  const auto& basis = basis_for(16);
  const auto& rule = rule_for(16);
  const spca::FastExpander fx(basis, rule, 33, {.eps_nufft = 2e-15});
  const auto stack = random_stack(1, 33, 4);
  const auto C = fx.ring_sums(stack.image(0));
  const auto targets = spca::PolarTargetSet::from_rule(rule);
  const auto phi = spca::phi_direct(stack.image(0), 33, targets, basis.params().c);
  double worst = 0.0, scale = 0.0;
  bool folded = false;
  for (std::size_t l = 0; l < rule.rings(); ++l) {
    const int nt = rule.angular_counts[l];
    const std::size_t off = targets.ring_offsets[l];
    for (int N = 0; N <= basis.max_N(); ++N) {
      std::complex<double> s = 0.0;
      for (int j = 0; j < nt; ++j) s += phi[off + j] * std::polar(1.0, -2.0 * pi * N * j / nt);
      const auto got = C[off + static_cast<std::size_t>(N % nt)];
      worst = std::max(worst, std::abs(got - s));
      scale = std::max(scale, std::abs(s));
      folded |= N >= nt;
    }
  }
  EXPECT_TRUE(folded);
  EXPECT_LT(worst, 1e-12 * scale);
}

TEST(FastExpander, SparsityAndChecks) {
  const auto& basis = basis_for(16);
  const auto& rule = rule_for(16);
  const spca::FastExpander sparse(basis, rule, 33);
  const spca::FastExpander dense(basis, rule, 33, {.sparsify = false});
  EXPECT_EQ(dense.kept_terms(), dense.dense_terms());
  EXPECT_LT(sparse.kept_terms(), dense.kept_terms());
  const auto stack = random_stack(2, 33, 5);
  EXPECT_LT(max_abs(sparse.expand(stack).values - dense.expand(stack).values), 1e-11);
  EXPECT_THROW(spca::FastExpander(basis, rule_for(32), 33), spca::ConfigError);
  EXPECT_THROW(sparse.expand(random_stack(1, 32, 1)), spca::ConfigError);
}

TEST(FastExpander, ParallelMatchesSerial) {
  const auto& basis = basis_for(16);
  const spca::FastExpander fx(basis, rule_for(16), 33);
  const auto stack = random_stack(40, 33, 6);
  const auto all = fx.expand(stack);
  std::vector<std::complex<double>> one(basis.size());
  for (int m : {0, 17, 39}) {
    fx.expand(stack.image(m), one);
    for (std::size_t i = 0; i < basis.size(); ++i) EXPECT_EQ(all.values(i, m), one[i]);
  }
}

TEST(Reconstruct, ZeroCoefficientsGiveZeroImage) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 2, 33, 7);
  cs.values.setZero();
  const auto img = spca::reconstruct_image(cs, basis, 1);
  for (double v : img) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(spca::reconstruct_image(cs, basis, 2), spca::ConfigError);
  cs.basis_hash ^= 1;
  EXPECT_THROW(spca::reconstruct_stack(cs, basis), spca::ConfigError);
}

TEST(Reconstruct, ZeroOutsideDisk) {
  const auto& basis = basis_for(16);
  const auto stack = stack_from(random_coefficients(basis, 1, 33, 8), basis);
  const spca::DiskGrid grid(33);
  std::vector<bool> inside(33 * 33, false);
  for (int p : grid.pixel()) inside[p] = true;
  for (int p = 0; p < 33 * 33; ++p) {
    if (!inside[p]) EXPECT_EQ(stack.pixels[p], 0.0);
  }
}

TEST(Reconstruct, InSpanRoundTripWithinGramDeviation) {
  const auto& basis = basis_for(16);
  for (int side : {33, 32}) {
    const double dev = spca::gram_spectrum(basis, side).max_deviation;
    const auto stack = stack_from(random_coefficients(basis, 3, side, 9), basis);
    const auto back = spca::reconstruct_stack(spca::expand_direct(stack, basis), basis);
    for (int m = 0; m < 3; ++m) {
      double err = 0.0;
      for (std::size_t p = 0; p < stack.pixels_per_image(); ++p) {
        err += std::pow(back.image(m)[p] - stack.image(m)[p], 2);
      }
      EXPECT_LE(std::sqrt(err), 10.0 * dev * norm2(stack.image(m))) << "side " << side;
    }
  }
}

// In-span image plus a function outside the truncation set: the residual is the out-of-set part.
TEST(Reconstruct, OutOfSetEnergyDominatesError) {
  const auto& basis = basis_for(16);
  const double dev = spca::gram_spectrum(basis).max_deviation;
  const spca::DiskGrid grid(33);
  auto stack = stack_from(random_coefficients(basis, 1, 33, 10), basis);
  const double in_norm = norm2(stack.pixels);
  const int N_out = basis.max_N() + 1;
  const auto outside = spca::solve_radial(N_out, basis.params().c);
  std::vector<double> extra(stack.pixels.size(), 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    extra[grid.pixel()[p]] = 0.05 * in_norm / grid.size() * 30.0 * outside[0](grid.radius()[p]) *
                             std::cos(N_out * grid.angle()[p]);
  }
  for (std::size_t p = 0; p < extra.size(); ++p) stack.pixels[p] += extra[p];
  const auto back = spca::reconstruct_stack(spca::expand_direct(stack, basis), basis);
  double err = 0.0;
  for (std::size_t p = 0; p < stack.pixels.size(); ++p) err += std::pow(back.pixels[p] - stack.pixels[p], 2);
  const double out_norm = norm2(extra);
  EXPECT_NEAR(std::sqrt(err), out_norm, 0.05 * out_norm + 10.0 * dev * in_norm);
}

TEST(Rotate, Identities) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 1, 33, 11);
  const Eigen::VectorXcd a = cs.values.col(0);
  EXPECT_EQ(spca::rotate_coefficients(a, basis.indices(), 0.0), a);
  const auto r = spca::rotate_coefficients(a, basis.indices(), 1.234);
  for (int n = 0; n < basis.n_max(0); ++n) EXPECT_EQ(r(n), a(n));
  const auto twice = spca::rotate_coefficients(spca::rotate_coefficients(a, basis.indices(), 0.4), basis.indices(), 0.9);
  EXPECT_LT((twice - spca::rotate_coefficients(a, basis.indices(), 1.3)).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::VectorXcd shorter = a.head(3);
  EXPECT_THROW(spca::rotate_coefficients(shorter, basis.indices(), 0.1), spca::ConfigError);
}

// Exact 90 degree grid rotation: rotated(x, y) = original(y, -x).
TEST(Rotate, SteeringUnderQuarterTurn) {
  const int L = 32, side = 65;
  const auto& basis = basis_for(L);
  const auto stack = stack_from(random_coefficients(basis, 2, side, 12), basis);
  auto rotated = spca::ImageStack::zeros(2, side);
  for (int m = 0; m < 2; ++m) {
    for (int y = -L; y <= L; ++y)
      for (int x = -L; x <= L; ++x) rotated.image(m)[(y + L) * side + x + L] = stack.image(m)[(-x + L) * side + y + L];
  }
  const auto before = spca::expand_fast(stack, basis, rule_for(L));
  const auto after = spca::expand_fast(rotated, basis, rule_for(L));
  for (int m = 0; m < 2; ++m) {
    const Eigen::VectorXcd steered = spca::rotate_coefficients(before.values.col(m), basis.indices(), pi / 2.0);
    const double rel = (steered - after.values.col(m)).norm() / after.values.col(m).norm();
    EXPECT_LT(rel, 1e-6);
  }
}

TEST(ExpansionErrorBound, Examples) {
  EXPECT_EQ(spca::expansion_error_bound(0.0, 0.0, 10.0), 0.0);
  EXPECT_NEAR(spca::expansion_error_bound(1e-3, 0.0, 1.0), 5e-3, 1e-18);
  EXPECT_NEAR(spca::expansion_error_bound(1e-4, 2.0 * pi * 1e-4, 10.0), 2.8e-3, 1e-17);
}

TEST(CoefficientSet, HashSensitiveToValues) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 2, 33, 13);
  const auto h = cs.hash();
  EXPECT_EQ(h, random_coefficients(basis, 2, 33, 13).hash());
  cs.values(5, 1) += 1e-300;
  EXPECT_EQ(h, cs.hash());
  cs.values(5, 1) += 1e-3;
  EXPECT_NE(h, cs.hash());
}

}  // namespace
