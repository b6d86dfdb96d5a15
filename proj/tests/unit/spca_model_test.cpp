#include "spca/spca_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spca/error.hpp"
#include "support.hpp"

namespace {

using std::numbers::pi;
using namespace spca::testing;

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

TEST(Mean, IdenticalImages) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 4, 33, 1);
  for (int m = 1; m < 4; ++m) cs.values.col(m) = cs.values.col(0);
  const auto mu = spca::mean_coefficients(cs);
  ASSERT_EQ(mu.size(), basis.n_max(0));
  EXPECT_LT(max_abs(mu - cs.values.col(0).head(mu.size())), 1e-16);
}

TEST(Mean, AlternatingSignsCancel) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 6, 33, 2);
  for (int m = 1; m < 6; ++m) cs.values.col(m) = (m % 2 ? -1.0 : 1.0) * cs.values.col(0);
  EXPECT_EQ(max_abs(spca::mean_coefficients(cs)), 0.0);
}

TEST(Mean, MatchesExtendedPrecisionSum) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 7, 33, 3);
  const auto mu = spca::mean_coefficients(cs);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    long double re = 0.0L, im = 0.0L;
    for (int m = 0; m < 7; ++m) {
      re += cs.values(i, m).real();
      im += cs.values(i, m).imag();
    }
    EXPECT_NEAR(mu(i).real(), static_cast<double>(re / 7), 1e-14);
    EXPECT_NEAR(mu(i).imag(), static_cast<double>(im / 7), 1e-14);
  }
  auto empty = cs;
  empty.values.resize(cs.values.rows(), 0);
  EXPECT_THROW(spca::mean_coefficients(empty), spca::ConfigError);
}

TEST(BCoefficients, ExplicitWeightsAndMeanRemoval) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 5, 33, 4);
  const auto mu = spca::mean_coefficients(cs);
  const auto b = spca::b_coefficients(cs, mu, basis);
  const auto& p = basis.params();
  for (std::size_t i = 0; i < basis.size(); i += 3) {
    const auto& e = basis.eigenpair(i);
    const double A = std::pow(p.c / (2.0 * pi * p.L), 2) * std::norm(e.alpha);
    for (int m = 0; m < 5; ++m) {
      const auto centered = cs.values(i, m) - (e.N == 0 ? mu(static_cast<Eigen::Index>(i)) : 0.0);
      EXPECT_NEAR(std::abs(b(i, m) - A * centered), 0.0, 1e-17);
    }
  }
  Eigen::VectorXcd wrong(3);
  EXPECT_THROW(spca::b_coefficients(cs, wrong, basis), spca::ConfigError);
}

TEST(BCoefficients, IdenticalImagesAndScaling) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 3, 33, 5);
  auto same = cs;
  for (int m = 1; m < 3; ++m) same.values.col(m) = same.values.col(0);
  const auto b_same = spca::b_coefficients(same, spca::mean_coefficients(same), basis);
  EXPECT_LT(max_abs(b_same.topRows(basis.n_max(0))), 1e-18);
  const auto b = spca::b_coefficients(cs, spca::mean_coefficients(cs), basis);
  cs.values *= 3.0;
  const auto b3 = spca::b_coefficients(cs, spca::mean_coefficients(cs), basis);
  EXPECT_LT(max_abs(b3 - 3.0 * b), 1e-15 * max_abs(b));
}

TEST(Blocks, SingleImage) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 1, 33, 6);
  const auto b = spca::b_coefficients(cs, spca::mean_coefficients(cs), basis);
  const auto blocks = spca::build_blocks(b, basis);
  ASSERT_EQ(blocks.size(), static_cast<std::size_t>(basis.max_N() + 1));
  EXPECT_EQ(max_abs(blocks[0]), 0.0);
  for (int N = 1; N <= basis.max_N(); ++N) {
    const auto bn = b.middleRows(static_cast<Eigen::Index>(basis.block_offset(N)), basis.n_max(N));
    const auto blk = spca::eigendecompose_block(N, blocks[N]);
    EXPECT_NEAR(blk.values(0), bn.squaredNorm(), 1e-12 * bn.squaredNorm());
    for (Eigen::Index j = 1; j < blk.values.size(); ++j) EXPECT_LE(blk.values(j), 1e-14 * bn.squaredNorm());
  }
}

// Covariance of all +-N coefficients over R equispaced rotations, steered by exp(-i N phi).
TEST(Blocks, EqualRotationAveragedCovariance) {
  const auto& basis = basis_for(16);
  const int M = 6;
  const auto cs = random_coefficients(basis, M, 33, 7);
  const auto b = spca::b_coefficients(cs, spca::mean_coefficients(cs), basis);
  std::vector<int> order;
  std::vector<Eigen::Index> src;
  std::vector<bool> conj;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    order.push_back(basis.indices()[i].N);
    src.push_back(static_cast<Eigen::Index>(i));
    conj.push_back(false);
    if (basis.indices()[i].N > 0) {
      order.push_back(-basis.indices()[i].N);
      src.push_back(static_cast<Eigen::Index>(i));
      conj.push_back(true);
    }
  }
  const auto F = static_cast<Eigen::Index>(order.size());
  const int R = 2 * basis.max_N() + 3;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(F, F);
  for (int m = 0; m < M; ++m) {
    for (int r = 0; r < R; ++r) {
      const double phi = 2.0 * pi * r / R;
      Eigen::VectorXcd v(F);
      for (Eigen::Index f = 0; f < F; ++f) {
        const int N = order[f];
        const auto x = conj[f] ? (N % 2 ? -1.0 : 1.0) * std::conj(b(src[f], m)) : b(src[f], m);
        v(f) = x * std::polar(1.0, -N * phi);
      }
      C += v * v.adjoint();
    }
  }
  C /= static_cast<double>(M * R);
  const auto blocks = spca::build_blocks(b, basis);
  const double scale = max_abs(C);
  double worst = 0.0;
  for (Eigen::Index f = 0; f < F; ++f) {
    for (Eigen::Index g = 0; g < F; ++g) {
      std::complex<double> expect = 0.0;
      if (order[f] == order[g]) {
        const int N = std::abs(order[f]);
        const auto off = static_cast<Eigen::Index>(basis.block_offset(N));
        const auto v = blocks[N](src[f] - off, src[g] - off);
        expect = order[f] < 0 ? std::conj(v) : v;
      }
      worst = std::max(worst, std::abs(C(f, g) - expect));
    }
  }
  EXPECT_LT(worst, 1e-12 * scale);
}

TEST(Eigendecompose, DiagonalBlock) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const auto blk = spca::eigendecompose_block(2, d);
  EXPECT_NEAR(blk.values(0), 3.0, 1e-15);
  EXPECT_NEAR(blk.values(1), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(blk.vectors(1, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(blk.vectors(0, 1) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(blk.N, 2);
}

TEST(Eigendecompose, RankOneBlock) {
  const Eigen::VectorXcd b = random_complex(5, 1, 8);
  const auto blk = spca::eigendecompose_block(1, b * b.adjoint());
  EXPECT_NEAR(blk.values(0), b.squaredNorm(), 1e-13);
  EXPECT_NEAR(std::abs(b.dot(blk.vectors.col(0))), b.norm(), 1e-13);
  for (int j = 1; j < 5; ++j) EXPECT_NEAR(blk.values(j), 0.0, 1e-13);
}

TEST(Eigendecompose, SpectralResolutionOfRandomPsd) {
  const Eigen::MatrixXcd x = random_complex(6, 9, 9);
  const Eigen::MatrixXcd h = x * x.adjoint();
  const auto blk = spca::eigendecompose_block(0, h);
  const Eigen::MatrixXcd back = blk.vectors * blk.values.cast<std::complex<double>>().asDiagonal() * blk.vectors.adjoint();
  EXPECT_LT(max_abs(back - h), 1e-12);
  EXPECT_LT(max_abs(blk.vectors.adjoint() * blk.vectors - Eigen::MatrixXcd::Identity(6, 6)), 1e-13);
  for (int j = 1; j < 6; ++j) EXPECT_GE(blk.values(j - 1), blk.values(j));
  for (int j = 0; j < 6; ++j) {
    Eigen::Index top;
    blk.vectors.col(j).cwiseAbs().maxCoeff(&top);
    EXPECT_EQ(blk.vectors(top, j).imag(), 0.0);
    EXPECT_GT(blk.vectors(top, j).real(), 0.0);
  }
}

TEST(Eigendecompose, ClampsRoundoffAndRejectsIndefinite) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 0.5;
  h(2, 2) = -1e-16;
  const auto blk = spca::eigendecompose_block(0, h);
  EXPECT_EQ(blk.values(2), 0.0);
  h(2, 2) = -0.1;
  EXPECT_THROW(spca::eigendecompose_block(0, h), spca::NumericalError);
}

TEST(SvdPath, AgreesWithEigenPath) {
  const Eigen::MatrixXcd rows = random_complex(8, 5, 10);
  const auto svd = spca::svd_block(3, rows);
  const auto eig = spca::eigendecompose_block(3, (1.0 / 5.0) * rows * rows.adjoint());
  ASSERT_EQ(svd.values.size(), 8);
  for (int j = 0; j < 8; ++j) EXPECT_NEAR(svd.values(j), eig.values(j), 1e-13);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(std::abs(svd.vectors.col(j).dot(eig.vectors.col(j))), 1.0, 1e-12);
  EXPECT_LT(max_abs(svd.vectors.adjoint() * svd.vectors - Eigen::MatrixXcd::Identity(8, 8)), 1e-13);
}

TEST(Model, SolversAgreeAndRankingOrdered) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 12, 33, 11);
  const auto a = spca::build_model(cs, basis, {.solver = spca::BlockSolver::Eigen});
  const auto b = spca::build_model(cs, basis, {.solver = spca::BlockSolver::Svd});
  const auto c = spca::build_model(cs, basis);
  ASSERT_EQ(a.components(), basis.size());
  for (std::size_t k = 0; k < a.components(); ++k) {
    EXPECT_NEAR(a.ranking[k].value, b.ranking[k].value, 1e-12 * a.ranking[0].value);
    EXPECT_NEAR(b.ranking[k].value, c.ranking[k].value, 1e-12 * a.ranking[0].value);
    if (k) {
      EXPECT_GE(a.ranking[k - 1].value, a.ranking[k].value);
      if (a.ranking[k - 1].value == a.ranking[k].value) EXPECT_LE(a.ranking[k - 1].N, a.ranking[k].N);
    }
  }
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(a.ranking[k].N, b.ranking[k].N);
    EXPECT_NEAR(std::abs(a.eigenvector(k).dot(b.eigenvector(k))), 1.0, 1e-9);
  }
  EXPECT_EQ(a.basis_hash, basis.hash());
  EXPECT_EQ(a.coeffs_hash, cs.hash());
}

TEST(Model, TailSums) {
  const auto& basis = basis_for(16);
  const auto model = spca::build_model(random_coefficients(basis, 20, 33, 12), basis);
  const auto vals = model.eigenvalues();
  double half = 0.0, full = 0.0;
  for (std::size_t k = 5; k < vals.size(); ++k) {
    half += vals[k];
    full += (model.ranking[k].N > 0 ? 2.0 : 1.0) * vals[k];
  }
  EXPECT_NEAR(model.tail(5), half, 1e-15 * half);
  EXPECT_NEAR(model.tail(5, true), full, 1e-15 * full);
  EXPECT_EQ(model.tail(model.components()), 0.0);
}

TEST(Model, InvariantUnderRotation) {
  const auto& basis = basis_for(16);
  auto cs = random_coefficients(basis, 15, 33, 13);
  const auto before = spca::build_model(cs, basis);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  for (Eigen::Index m = 0; m < cs.values.cols(); ++m) {
    cs.values.col(m) = spca::rotate_coefficients(cs.values.col(m), basis.indices(), angle(rng));
  }
  const auto after = spca::build_model(cs, basis);
  for (std::size_t k = 0; k < before.components(); ++k) {
    EXPECT_NEAR(before.ranking[k].value, after.ranking[k].value, 1e-12 * before.ranking[0].value);
  }
}

TEST(Model, TopComponentBeatsRandomDirections) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 30, 33, 15);
  const auto model = spca::build_model(cs, basis);
  const auto b = spca::b_coefficients(cs, model);
  const auto blocks = spca::build_blocks(b, basis);
  std::mt19937_64 rng(16);
  for (int N : {0, 1, 4}) {
    const double top = model.blocks[N].values(0);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXcd u = random_complex(basis.n_max(N), 1, rng());
      u.normalize();
      EXPECT_LE((u.adjoint() * blocks[N] * u)(0).real(), top * (1.0 + 1e-12));
    }
  }
}

TEST(Components, SteerablePolarSamples) {
  const auto& basis = basis_for(16);
  const auto model = spca::build_model(random_coefficients(basis, 10, 33, 17), basis);
  const std::vector<double> radii = {0.1, 0.45, 0.8};
  const int n_angles = 24;
  for (std::size_t k = 0; k < 8; ++k) {
    const int N = model.ranking[k].N;
    const auto g = spca::component_polar(model, basis, k, radii, n_angles);
    const auto step = std::polar(1.0, 2.0 * pi * N / n_angles);
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (int j = 0; j + 1 < n_angles; ++j) EXPECT_NEAR(std::abs(g(r, j + 1) - g(r, j) * step), 0.0, 1e-14);
  }
  EXPECT_THROW(spca::component_polar(model, basis, 0, radii, 0), spca::ConfigError);
}

TEST(Components, ZeroEigenvectorGivesZeroImage) {
  const auto& basis = basis_for(16);
  auto model = spca::build_model(random_coefficients(basis, 4, 33, 18), basis);
  const auto& ref = model.ranking[0];
  model.blocks[ref.N].vectors.col(ref.local).setZero();
  for (const auto& v : spca::component_image(model, basis, 0, 33)) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(Components, CartesianMatchesPolarAtPixels) {
  const auto& basis = basis_for(16);
  const auto model = spca::build_model(random_coefficients(basis, 10, 33, 19), basis);
  const auto img = spca::component_image(model, basis, 2, 33);
  // Pixel (x, y) = (16, 0) sits at radius 1, angle 0; (0, 8) at radius 0.5, angle pi/2.
  const std::vector<double> radii = {1.0, 0.5};
  const auto polar = spca::component_polar(model, basis, 2, radii, 4);
  EXPECT_NEAR(std::abs(img[16 * 33 + 32] - polar(0, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(img[24 * 33 + 16] - polar(1, 1)), 0.0, 1e-14);
}

TEST(Project, PicksMatchingComponent) {
  const auto& basis = basis_for(16);
  const auto model = spca::build_model(random_coefficients(basis, 10, 33, 20), basis);
  const std::size_t K = model.components();
  for (std::size_t k : {std::size_t{0}, std::size_t{3}, std::size_t{11}}) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()), 1);
    const auto& ref = model.ranking[k];
    const Eigen::VectorXcd g = model.eigenvector(k);
    b.middleRows(static_cast<Eigen::Index>(basis.block_offset(ref.N)), g.size()) = g;
    const auto proj = spca::project(b, model, K);
    for (std::size_t j = 0; j < K; ++j) {
      EXPECT_NEAR(std::abs(proj.d(0, static_cast<Eigen::Index>(j))), j == k ? 1.0 : 0.0, 1e-13);
    }
  }
  const auto zero = spca::project(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()), 2), model, 5);
  EXPECT_EQ(max_abs(zero.d), 0.0);
  EXPECT_THROW(spca::project(Eigen::MatrixXcd::Zero(3, 1), model, 5), spca::ConfigError);
  EXPECT_THROW(spca::project(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()), 1), model, K + 1),
               spca::ConfigError);
}

TEST(Project, ParsevalOverAllComponents) {
  const auto& basis = basis_for(16);
  const auto cs = random_coefficients(basis, 9, 33, 21);
  const auto model = spca::build_model(cs, basis);
  const auto proj = spca::project(cs, basis, model, model.components());
  const auto b = spca::b_coefficients(cs, model);
  for (int m = 0; m < 9; ++m) {
    EXPECT_NEAR(proj.d.row(m).squaredNorm(), b.col(m).squaredNorm(), 1e-12 * b.col(m).squaredNorm());
  }
}

TEST(TruncatedReconstruction, EndpointsAndResidualIdentity) {
  const auto& basis = basis_for(16);
  const int M = 25;
  const auto cs = random_coefficients(basis, M, 33, 22);
  const auto model = spca::build_model(cs, basis);
  const std::size_t all = model.components();
  const auto proj = spca::project(cs, basis, model, all);

  const auto full = spca::truncated_reconstruction(model, proj, all, basis);
  EXPECT_LT(max_abs(full.values - cs.values), 1e-10 * max_abs(cs.values));
  const auto none = spca::truncated_reconstruction(model, proj, 0, basis);
  for (Eigen::Index m = 0; m < M; ++m) {
    EXPECT_LT(max_abs(none.values.col(m).head(model.mean.size()) - model.mean), 1e-15);
    EXPECT_EQ(max_abs(none.values.col(m).tail(none.values.rows() - model.mean.size())), 0.0);
  }

  const auto b = spca::b_coefficients(cs, model);
  for (std::size_t K : {std::size_t{0}, std::size_t{5}, std::size_t{25}, all}) {
    const auto approx = spca::truncated_b_reconstruction(model, proj, K);
    const double err = (b - approx).squaredNorm() / M;
    const double tail = model.tail(K);
    EXPECT_NEAR(err, tail, 1e-8 * std::max(tail, 1e-3 * model.tail(0))) << "K=" << K;
  }
  EXPECT_THROW(spca::truncated_b_reconstruction(model, spca::project(cs, basis, model, 3), 4), spca::ConfigError);
}

TEST(TotalErrorBound, Examples) {
  EXPECT_DOUBLE_EQ(spca::total_error_bound(0.7, 0.0, 0.0, 10.0), 0.7);
  const double e = spca::expansion_error_bound(1e-3, 2e-3, 10.0);
  EXPECT_DOUBLE_EQ(spca::total_error_bound(0.0, 1e-3, 2e-3, 10.0), e * e);
  EXPECT_NEAR(spca::total_error_bound(1.0, 0.02, 0.0, 1.0), 1.21, 1e-15);
}

}  // namespace
