#include "spca/expand.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fftw_lock.hpp"
#include "spca/error.hpp"
#include "spca/hash.hpp"
#include "spca/parallel.hpp"

namespace spca {
namespace {

constexpr std::size_t kIndexBlock = 256;
constexpr std::size_t kImageBlock = 16;

void check_compatible(const ImageStack& stack, const PswfBasis& basis) {
  stack.validate();
  if (stack.L() != basis.params().L) {
    std::ostringstream msg;
    msg << "image side " << stack.side << " implies L=" << stack.L() << " but basis has L=" << basis.params().L;
    throw ConfigError(msg.str());
  }
}

// Disk pixels of all images as a (points x M) matrix.
Eigen::MatrixXd disk_pixels(const ImageStack& stack, const DiskGrid& grid) {
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(grid.size()), stack.count);
  for (int m = 0; m < stack.count; ++m) {
    const auto img = stack.image(m);
    for (std::size_t p = 0; p < grid.size(); ++p) Y(static_cast<Eigen::Index>(p), m) = img[grid.pixel()[p]];
  }
  return Y;
}

}  // namespace

ImageStack ImageStack::zeros(int count, int side) {
  ImageStack s;
  s.count = count;
  s.side = side;
  s.pixels.assign(static_cast<std::size_t>(count) * side * side, 0.0);
  return s;
}

std::span<const double> ImageStack::image(std::size_t m) const {
  return std::span<const double>(pixels).subspan(m * pixels_per_image(), pixels_per_image());
}

std::span<double> ImageStack::image(std::size_t m) {
  return std::span<double>(pixels).subspan(m * pixels_per_image(), pixels_per_image());
}

void ImageStack::validate() const {
  if (count < 0 || side < 2) throw ConfigError("image stack needs a side of at least 2");
  if (pixels.size() != static_cast<std::size_t>(count) * pixels_per_image()) {
    throw ConfigError("image stack pixel count does not match its dimensions");
  }
  for (double v : pixels) {
    if (!std::isfinite(v)) throw ConfigError("image stack contains non-finite values");
  }
}

std::uint64_t CoefficientSet::hash() const {
  Fnv1a h;
  h.value(basis_hash);
  h.value(static_cast<std::uint32_t>(method));
  h.value(side);
  for (const auto& ix : indices) {
    h.value(ix.N);
    h.value(ix.n);
  }
  h.bytes(values.data(), sizeof(std::complex<double>) * static_cast<std::size_t>(values.size()));
  return h.digest();
}

CoefficientSet expand_direct(const ImageStack& stack, const PswfBasis& basis) {
  check_compatible(stack, basis);
  const GridSampling sampling(basis, DiskGrid(stack.side));
  const Eigen::MatrixXd Y = disk_pixels(stack, sampling.grid());

  CoefficientSet out;
  out.basis_hash = basis.hash();
  out.method = ExpansionMethod::Direct;
  out.side = stack.side;
  out.indices = basis.indices();
  out.values.resize(static_cast<Eigen::Index>(basis.size()), stack.count);

  const std::size_t blocks = (basis.size() + kIndexBlock - 1) / kIndexBlock;
  parallel_for(0, blocks, [&](std::size_t b) {
    const std::size_t begin = b * kIndexBlock;
    const std::size_t end = std::min(basis.size(), begin + kIndexBlock);
    Eigen::MatrixXd re, im;
    sampling.columns(begin, end, re, im);
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const auto first = static_cast<Eigen::Index>(begin);
    out.values.middleRows(first, rows).real() = re.transpose() * Y;
    out.values.middleRows(first, rows).imag() = -(im.transpose() * Y);
  });
  return out;
}

struct FastExpander::RingFfts {
  std::map<int, fftw_plan> plans;
  ~RingFfts() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    for (auto& [n, p] : plans) fftw_destroy_plan(p);
  }
};

FastExpander::FastExpander(const PswfBasis& basis, const QuadratureRule& rule, int side, const FastOptions& options)
    : basis_(&basis), rule_(rule), side_(side), options_(options), ffts_(std::make_unique<RingFfts>()) {
  const double c = basis.params().c;
  if (std::fabs(rule.bandlimit - 2.0 * c) > 1e-12 * c) {
    std::ostringstream msg;
    msg << "quadrature rule bandlimit " << rule.bandlimit << " does not match 2c = " << 2.0 * c;
    throw ConfigError(msg.str());
  }
  if (rule.basis_hash != 0 && rule.basis_hash != basis.hash()) {
    throw ConfigError("quadrature rule was built for a different basis");
  }
  if (DiskGrid::rate_for_side(side) != basis.params().L) throw ConfigError("image side does not match basis rate");

  targets_ = PolarTargetSet::from_rule(rule_);
  nufft_ = std::make_unique<NufftPlan>(side, targets_, c, options_.eps_nufft);

  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    for (int n : rule_.angular_counts) {
      if (ffts_->plans.count(n)) continue;
      std::vector<std::complex<double>> buf(n);
      auto* p = reinterpret_cast<fftw_complex*>(buf.data());
      fftw_plan plan = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      if (!plan) throw NumericalError("fftw plan creation failed");
      ffts_->plans.emplace(n, plan);
    }
  }

  const Eigen::MatrixXd R = basis.radial_at(rule_.radial_nodes);  // rings x |basis|
  const double pre = c / (std::sqrt(2.0 * std::numbers::pi) * basis.params().L);
  const auto offsets = rule_.ring_offsets();
  row_start_.assign(basis.size() + 1, 0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const int N = basis.indices()[i].N;
    for (std::size_t l = 0; l < rule_.rings(); ++l) {
      const double r = R(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i));
      if (options_.sparsify && std::fabs(r) < 1e-12) continue;
      const int nt = rule_.angular_counts[l];
      slot_.push_back(offsets[l] + static_cast<std::size_t>(N % nt));
      factor_.push_back(pre * rule_.radial_weights[l] * r * rule_.radial_nodes[l] / nt);
    }
    row_start_[i + 1] = factor_.size();
  }
}

FastExpander::~FastExpander() = default;

std::vector<std::complex<double>> FastExpander::ring_sums(std::span<const double> image) const {
  std::vector<std::complex<double>> buf(targets_.size());
  nufft_->execute(image, buf);
  for (std::size_t l = 0; l < rule_.rings(); ++l) {
    auto* p = reinterpret_cast<fftw_complex*>(buf.data() + targets_.ring_offsets[l]);
    fftw_execute_dft(ffts_->plans.at(rule_.angular_counts[l]), p, p);
  }
  return buf;
}

void FastExpander::expand(std::span<const double> image, std::span<std::complex<double>> out) const {
  if (out.size() != basis_->size()) throw ConfigError("coefficient buffer size does not match basis");
  const auto C = ring_sums(image);
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    std::complex<double> s = 0.0;
    for (std::size_t e = row_start_[i]; e < row_start_[i + 1]; ++e) s += factor_[e] * C[slot_[e]];
    out[i] = s;
  }
}

CoefficientSet FastExpander::expand(const ImageStack& stack) const {
  check_compatible(stack, *basis_);
  if (stack.side != side_) throw ConfigError("image side does not match the fast expander");
  CoefficientSet out;
  out.basis_hash = basis_->hash();
  out.method = ExpansionMethod::Fast;
  out.side = stack.side;
  out.residual_bound = rule_.theta_q;
  out.indices = basis_->indices();
  out.values.resize(static_cast<Eigen::Index>(basis_->size()), stack.count);
  const std::size_t blocks = (static_cast<std::size_t>(stack.count) + kImageBlock - 1) / kImageBlock;
  parallel_for(0, blocks, [&](std::size_t b) {
    const std::size_t end = std::min<std::size_t>(stack.count, (b + 1) * kImageBlock);
    for (std::size_t m = b * kImageBlock; m < end; ++m) {
      auto col = out.values.col(static_cast<Eigen::Index>(m));
      expand(stack.image(m), std::span<std::complex<double>>(col.data(), basis_->size()));
    }
  });
  return out;
}

CoefficientSet expand_fast(const ImageStack& stack, const PswfBasis& basis, const QuadratureRule& rule,
                           const FastOptions& options) {
  check_compatible(stack, basis);
  const FastExpander fx(basis, rule, stack.side, options);
  return fx.expand(stack);
}

ImageStack reconstruct_stack(const CoefficientSet& coeffs, const PswfBasis& basis) {
  if (coeffs.basis_hash != basis.hash()) throw ConfigError("coefficients were computed with a different basis");
  if (coeffs.values.rows() != static_cast<Eigen::Index>(basis.size())) {
    throw ConfigError("coefficient count does not match basis");
  }
  const GridSampling sampling(basis, DiskGrid(coeffs.side));
  const auto& grid = sampling.grid();
  const Eigen::Index M = coeffs.values.cols();

  // Image = sum_i mult_i Re(a_i psi_hat_i) with mult 1 for N = 0 and 2 otherwise.
  Eigen::MatrixXd are(coeffs.values.rows(), M), aim(coeffs.values.rows(), M);
  for (Eigen::Index i = 0; i < coeffs.values.rows(); ++i) {
    const double mult = basis.indices()[static_cast<std::size_t>(i)].N == 0 ? 1.0 : 2.0;
    are.row(i) = mult * coeffs.values.row(i).real();
    aim.row(i) = mult * coeffs.values.row(i).imag();
  }
  const std::size_t blocks = (basis.size() + kIndexBlock - 1) / kIndexBlock;
  std::vector<Eigen::MatrixXd> partial(blocks);
  parallel_for(0, blocks, [&](std::size_t b) {
    const std::size_t begin = b * kIndexBlock;
    const std::size_t end = std::min(basis.size(), begin + kIndexBlock);
    Eigen::MatrixXd re, im;
    sampling.columns(begin, end, re, im);
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const auto first = static_cast<Eigen::Index>(begin);
    partial[b] = re * are.middleRows(first, rows) - im * aim.middleRows(first, rows);
  });
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), M);
  for (const auto& p : partial) Y += p;

  ImageStack out = ImageStack::zeros(static_cast<int>(M), coeffs.side);
  for (Eigen::Index m = 0; m < M; ++m) {
    auto img = out.image(static_cast<std::size_t>(m));
    for (std::size_t p = 0; p < grid.size(); ++p) img[grid.pixel()[p]] = Y(static_cast<Eigen::Index>(p), m);
  }
  return out;
}

std::vector<double> reconstruct_image(const CoefficientSet& coeffs, const PswfBasis& basis, std::size_t m) {
  if (m >= coeffs.count()) throw ConfigError("image index out of range");
  CoefficientSet one = coeffs;
  one.values = coeffs.values.col(static_cast<Eigen::Index>(m));
  ImageStack s = reconstruct_stack(one, basis);
  return std::move(s.pixels);
}

Eigen::VectorXcd rotate_coefficients(const Eigen::VectorXcd& coeffs, std::span<const BasisIndex> indices, double phi) {
  if (static_cast<std::size_t>(coeffs.size()) != indices.size()) throw ConfigError("coefficient/index size mismatch");
  Eigen::VectorXcd out(coeffs.size());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    out(i) = coeffs(i) * std::polar(1.0, -indices[static_cast<std::size_t>(i)].N * phi);
  }
  return out;
}

double expansion_error_bound(double eps_space, double delta_c, double T) {
  return (eps_space + delta_c / (2.0 * std::numbers::pi)) * (T + 4.0);
}

}  // namespace spca
