#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "spca/pswf_basis.hpp"

namespace spca {

// Pixels of a side x side image whose sample points k/L lie in the closed unit disk.
// Odd side: L = (side-1)/2, k in {-L..L}^2. Even side: L = side/2, k in {-L..L-1}^2.
// Pixel (row, col) sits at k = (col - L, row - L).
class DiskGrid {
 public:
  explicit DiskGrid(int side);

  static int rate_for_side(int side) { return side % 2 ? (side - 1) / 2 : side / 2; }

  int side() const { return side_; }
  int L() const { return L_; }
  std::size_t size() const { return pixel_.size(); }

  const std::vector<int>& pixel() const { return pixel_; }  // row * side + col
  const std::vector<int>& kx() const { return kx_; }
  const std::vector<int>& ky() const { return ky_; }
  const std::vector<double>& radius() const { return radius_; }
  const std::vector<double>& angle() const { return angle_; }
  const std::vector<double>& unique_radii() const { return unique_radii_; }
  const std::vector<int>& radius_slot() const { return radius_slot_; }

 private:
  int side_ = 0;
  int L_ = 0;
  std::vector<int> pixel_, kx_, ky_;
  std::vector<double> radius_, angle_;
  std::vector<double> unique_radii_;
  std::vector<int> radius_slot_;
};

// Samples of the modified prolates psi_hat at the disk pixels, generated in
// column blocks on demand (the full matrix is too large for big L).
class GridSampling {
 public:
  GridSampling(const PswfBasis& basis, DiskGrid grid);

  const DiskGrid& grid() const { return grid_; }
  const PswfBasis& basis() const { return *basis_; }

  // Columns [begin, end) of the (points x |basis|) sample matrix.
  Eigen::MatrixXcd columns(std::size_t begin, std::size_t end) const;
  void columns(std::size_t begin, std::size_t end, Eigen::MatrixXd& re, Eigen::MatrixXd& im) const;

 private:
  const PswfBasis* basis_;
  DiskGrid grid_;
  Eigen::MatrixXd radial_;  // unique radii x |basis|
};

GridSampling sample_basis_cartesian(const PswfBasis& basis, int side);

}  // namespace spca
