#include "spca/spca_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spca/error.hpp"
#include "spca/parallel.hpp"

namespace spca {
namespace {

void fix_phase(Eigen::MatrixXcd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double top = v.col(j).cwiseAbs().maxCoeff();
    if (top == 0.0) continue;
    Eigen::Index pick = 0;
    while (std::abs(v(pick, j)) < top * (1.0 - 1e-12)) ++pick;
    v.col(j) *= std::conj(v(pick, j)) / std::abs(v(pick, j));
    v(pick, j) = std::abs(v(pick, j));
  }
}

void check_basis(const CoefficientSet& coeffs, const PswfBasis& basis) {
  if (coeffs.basis_hash != basis.hash()) throw ConfigError("coefficients were computed with a different basis");
  if (coeffs.values.rows() != static_cast<Eigen::Index>(basis.size())) {
    throw ConfigError("coefficient count does not match basis");
  }
}

}  // namespace

Eigen::VectorXcd SpcaModel::eigenvector(std::size_t k) const {
  const auto& r = ranking.at(k);
  return blocks.at(r.N).vectors.col(r.local);
}

std::vector<double> SpcaModel::eigenvalues() const {
  std::vector<double> out;
  out.reserve(ranking.size());
  for (const auto& r : ranking) out.push_back(r.value);
  return out;
}

double SpcaModel::tail(std::size_t K, bool full_set) const {
  double s = 0.0;
  for (std::size_t k = ranking.size(); k-- > K;) s += (full_set && ranking[k].N > 0 ? 2.0 : 1.0) * ranking[k].value;
  return s;
}

void SpcaModel::rank() {
  ranking.clear();
  for (const auto& b : blocks) {
    for (Eigen::Index j = 0; j < b.values.size(); ++j) ranking.push_back({b.N, static_cast<int>(j), b.values(j)});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const ComponentRef& a, const ComponentRef& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.N != b.N) return a.N < b.N;
    return a.local < b.local;
  });
}

Eigen::VectorXcd mean_coefficients(const CoefficientSet& coeffs) {
  if (coeffs.count() == 0) throw ConfigError("cannot average an empty stack");
  Eigen::Index n0 = 0;
  while (n0 < static_cast<Eigen::Index>(coeffs.indices.size()) && coeffs.indices[n0].N == 0) ++n0;
  Eigen::VectorXcd mu(n0);
  for (Eigen::Index i = 0; i < n0; ++i) {
    std::complex<double> s = 0.0;
    for (Eigen::Index m = 0; m < coeffs.values.cols(); ++m) s += coeffs.values(i, m);
    mu(i) = s / static_cast<double>(coeffs.count());
  }
  return mu;
}

Eigen::MatrixXcd b_coefficients(const CoefficientSet& coeffs, const Eigen::VectorXcd& mean, const PswfBasis& basis) {
  check_basis(coeffs, basis);
  if (mean.size() != basis.n_max(0)) throw ConfigError("mean vector length does not match the N = 0 block");
  Eigen::MatrixXcd b = coeffs.values;
  b.topRows(mean.size()).colwise() -= mean;
  for (std::size_t i = 0; i < basis.size(); ++i) b.row(static_cast<Eigen::Index>(i)) *= basis.coefficient_weight(i);
  return b;
}

Eigen::MatrixXcd b_coefficients(const CoefficientSet& coeffs, const SpcaModel& model) {
  if (coeffs.basis_hash != model.basis_hash) throw ConfigError("coefficients and model use different bases");
  if (coeffs.values.rows() != model.weights.size()) throw ConfigError("coefficient count does not match the model");
  Eigen::MatrixXcd b = coeffs.values;
  b.topRows(model.mean.size()).colwise() -= model.mean;
  return model.weights.asDiagonal() * b;
}

std::vector<Eigen::MatrixXcd> build_blocks(const Eigen::MatrixXcd& b, const PswfBasis& basis) {
  if (b.rows() != static_cast<Eigen::Index>(basis.size())) throw ConfigError("b vectors do not match basis");
  const double inv_m = b.cols() ? 1.0 / static_cast<double>(b.cols()) : 0.0;
  std::vector<Eigen::MatrixXcd> blocks(static_cast<std::size_t>(basis.max_N() + 1));
  parallel_for(0, blocks.size(), [&](std::size_t N) {
    const int n = basis.n_max(static_cast<int>(N));
    const auto rows = b.middleRows(static_cast<Eigen::Index>(basis.block_offset(static_cast<int>(N))), n);
    blocks[N] = inv_m * (rows * rows.adjoint());
  });
  return blocks;
}

SpcaBlock eigendecompose_block(int N, const Eigen::MatrixXcd& block) {
  SpcaBlock out;
  out.N = N;
  const Eigen::Index n = block.rows();
  if (n == 0) return out;
  const Eigen::MatrixXcd h = 0.5 * (block + block.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("covariance block eigensolver did not converge");
  const double trace = h.trace().real();
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double v = es.eigenvalues()(n - 1 - j);
    if (v < 0.0) {
      if (v < -1e-14 * trace) throw NumericalError("covariance block is not positive semi-definite");
      v = 0.0;
    }
    out.values(j) = v;
    out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
  }
  fix_phase(out.vectors);
  return out;
}

SpcaBlock svd_block(int N, const Eigen::MatrixXcd& b_rows) {
  SpcaBlock out;
  out.N = N;
  const Eigen::Index n = b_rows.rows();
  if (n == 0) return out;
  const double scale = b_rows.cols() ? 1.0 / std::sqrt(static_cast<double>(b_rows.cols())) : 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(scale * b_rows, Eigen::ComputeFullU);
  out.values = Eigen::VectorXd::Zero(n);
  const auto& s = svd.singularValues();
  for (Eigen::Index j = 0; j < s.size(); ++j) out.values(j) = s(j) * s(j);
  out.vectors = svd.matrixU();
  fix_phase(out.vectors);
  return out;
}

SpcaModel build_model(const CoefficientSet& coeffs, const PswfBasis& basis, const SpcaOptions& options) {
  check_basis(coeffs, basis);
  SpcaModel model;
  model.basis_hash = basis.hash();
  model.coeffs_hash = coeffs.hash();
  model.L = basis.params().L;
  model.c = basis.params().c;
  model.mean = mean_coefficients(coeffs);
  model.weights.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) model.weights(static_cast<Eigen::Index>(i)) = basis.coefficient_weight(i);
  for (int N = 0; N <= basis.max_N(); ++N) model.offsets.push_back(basis.block_offset(N));

  const Eigen::MatrixXcd b = b_coefficients(coeffs, model.mean, basis);
  const Eigen::Index M = b.cols();
  model.blocks.resize(static_cast<std::size_t>(basis.max_N() + 1));
  parallel_for(0, model.blocks.size(), [&](std::size_t Nu) {
    const int N = static_cast<int>(Nu);
    const int n = basis.n_max(N);
    const auto rows = b.middleRows(static_cast<Eigen::Index>(basis.block_offset(N)), n);
    const bool svd = options.solver == BlockSolver::Svd || (options.solver == BlockSolver::Auto && M < n);
    if (svd) {
      model.blocks[Nu] = svd_block(N, rows);
    } else {
      const Eigen::MatrixXcd B = (1.0 / static_cast<double>(M)) * (rows * rows.adjoint());
      model.blocks[Nu] = eigendecompose_block(N, B);
    }
  });
  model.rank();
  return model;
}

Eigen::MatrixXcd component_polar(const SpcaModel& model, const PswfBasis& basis, std::size_t k,
                                 std::span<const double> radii, int n_angles) {
  if (model.basis_hash != basis.hash()) throw ConfigError("model was built with a different basis");
  if (n_angles < 1) throw ConfigError("need at least one angle");
  const auto& ref = model.ranking.at(k);
  const Eigen::VectorXcd g = model.eigenvector(k);
  const std::size_t first = basis.block_offset(ref.N);
  const Eigen::MatrixXd R = basis.radial_at(radii);
  Eigen::VectorXcd profile = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(radii.size()));
  for (Eigen::Index n = 0; n < g.size(); ++n) {
    const std::size_t i = first + static_cast<std::size_t>(n);
    profile += (g(n) * basis.sample_scale(i)) * R.col(static_cast<Eigen::Index>(i)).cast<std::complex<double>>();
  }
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(radii.size()), n_angles);
  for (int j = 0; j < n_angles; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / n_angles;
    out.col(j) = profile * std::polar(1.0, ref.N * theta);
  }
  return out;
}

std::vector<std::complex<double>> component_image(const SpcaModel& model, const PswfBasis& basis, std::size_t k,
                                                  int side) {
  if (model.basis_hash != basis.hash()) throw ConfigError("model was built with a different basis");
  const auto& ref = model.ranking.at(k);
  const Eigen::VectorXcd g = model.eigenvector(k);
  const std::size_t first = basis.block_offset(ref.N);
  const GridSampling sampling(basis, DiskGrid(side));
  const Eigen::VectorXcd v = sampling.columns(first, first + static_cast<std::size_t>(g.size())) * g;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(side) * side, 0.0);
  const auto& pix = sampling.grid().pixel();
  for (std::size_t p = 0; p < pix.size(); ++p) out[pix[p]] = v(static_cast<Eigen::Index>(p));
  return out;
}

ProjectionSet project(const Eigen::MatrixXcd& b, const SpcaModel& model, std::size_t K) {
  if (K > model.components()) throw ConfigError("requested more components than the model holds");
  if (b.rows() != model.weights.size()) throw ConfigError("b vectors do not match the model basis");
  ProjectionSet out;
  out.K = static_cast<int>(K);
  out.d.resize(b.cols(), static_cast<Eigen::Index>(K));
  parallel_for(0, K, [&](std::size_t k) {
    const auto& ref = model.ranking[k];
    const Eigen::VectorXcd g = model.eigenvector(k);
    const auto rows = b.middleRows(static_cast<Eigen::Index>(model.offsets[ref.N]), g.size());
    out.d.col(static_cast<Eigen::Index>(k)) = rows.transpose() * g.conjugate();
  });
  return out;
}

ProjectionSet project(const CoefficientSet& coeffs, const PswfBasis& basis, const SpcaModel& model, std::size_t K) {
  if (model.basis_hash != basis.hash()) throw ConfigError("model was built with a different basis");
  return project(b_coefficients(coeffs, model.mean, basis), model, K);
}

Eigen::MatrixXcd truncated_b_reconstruction(const SpcaModel& model, const ProjectionSet& proj, std::size_t K) {
  if (K > static_cast<std::size_t>(proj.K)) throw ConfigError("projection set holds fewer components than requested");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(model.weights.size(), proj.d.rows());
  for (std::size_t k = 0; k < K; ++k) {
    const auto& ref = model.ranking.at(k);
    const Eigen::VectorXcd g = model.eigenvector(k);
    out.middleRows(static_cast<Eigen::Index>(model.offsets[ref.N]), g.size()) +=
        g * proj.d.col(static_cast<Eigen::Index>(k)).transpose();
  }
  return out;
}

CoefficientSet truncated_reconstruction(const SpcaModel& model, const ProjectionSet& proj, std::size_t K,
                                        const PswfBasis& basis, int side) {
  if (model.basis_hash != basis.hash()) throw ConfigError("model was built with a different basis");
  CoefficientSet out;
  out.basis_hash = basis.hash();
  out.method = ExpansionMethod::Direct;
  out.side = side > 0 ? side : 2 * model.L + 1;
  out.indices = basis.indices();
  out.values = truncated_b_reconstruction(model, proj, K);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) out.values.row(i) /= model.weights(i);
  out.values.topRows(model.mean.size()).colwise() += model.mean;
  return out;
}

double total_error_bound(double tail, double eps_space, double delta_c, double T) {
  const double e = expansion_error_bound(eps_space, delta_c, T);
  return tail + 2.0 * e * std::sqrt(tail) + e * e;
}

}  // namespace spca
