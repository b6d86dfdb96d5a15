#include "spca/disk_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spca/error.hpp"

namespace spca {

DiskGrid::DiskGrid(int side) : side_(side), L_(rate_for_side(side)) {
  if (side < 2) throw ConfigError("image side must be at least 2");
  std::map<long, int> slots;
  for (int row = 0; row < side; ++row) {
    const int y = row - L_;
    for (int col = 0; col < side; ++col) {
      const int x = col - L_;
      const long r2 = static_cast<long>(x) * x + static_cast<long>(y) * y;
      if (r2 > static_cast<long>(L_) * L_) continue;
      pixel_.push_back(row * side + col);
      kx_.push_back(x);
      ky_.push_back(y);
      radius_.push_back(std::sqrt(static_cast<double>(r2)) / L_);
      angle_.push_back(std::atan2(static_cast<double>(y), static_cast<double>(x)));
      slots.emplace(r2, 0);
    }
  }
  int s = 0;
  for (auto& [r2, slot] : slots) {
    slot = s++;
    unique_radii_.push_back(std::sqrt(static_cast<double>(r2)) / L_);
  }
  radius_slot_.reserve(pixel_.size());
  for (std::size_t p = 0; p < pixel_.size(); ++p) {
    const long r2 = static_cast<long>(kx_[p]) * kx_[p] + static_cast<long>(ky_[p]) * ky_[p];
    radius_slot_.push_back(slots.at(r2));
  }
}

GridSampling::GridSampling(const PswfBasis& basis, DiskGrid grid)
    : basis_(&basis), grid_(std::move(grid)), radial_(basis.radial_at(grid_.unique_radii())) {
  if (grid_.L() != basis.params().L) throw ConfigError("image grid rate does not match basis rate");
}

void GridSampling::columns(std::size_t begin, std::size_t end, Eigen::MatrixXd& re, Eigen::MatrixXd& im) const {
  const auto P = static_cast<Eigen::Index>(grid_.size());
  const auto K = static_cast<Eigen::Index>(end - begin);
  re.resize(P, K);
  im.resize(P, K);
  const auto& slot = grid_.radius_slot();
  const auto& theta = grid_.angle();
  std::vector<std::complex<double>> phase(P);
  int phase_N = -1;
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::size_t i = begin + static_cast<std::size_t>(k);
    const int N = basis_->indices()[i].N;
    if (N != phase_N) {
      for (Eigen::Index p = 0; p < P; ++p) phase[p] = std::polar(1.0, N * theta[p]);
      phase_N = N;
    }
    const std::complex<double> s = basis_->sample_scale(i);
    for (Eigen::Index p = 0; p < P; ++p) {
      const std::complex<double> v = s * radial_(slot[p], static_cast<Eigen::Index>(i)) * phase[p];
      re(p, k) = v.real();
      im(p, k) = v.imag();
    }
  }
}

Eigen::MatrixXcd GridSampling::columns(std::size_t begin, std::size_t end) const {
  Eigen::MatrixXd re, im;
  columns(begin, end, re, im);
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

GridSampling sample_basis_cartesian(const PswfBasis& basis, int side) { return GridSampling(basis, DiskGrid(side)); }

}  // namespace spca
