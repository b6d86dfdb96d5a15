#pragma once

namespace spca {

struct BandParams {
  int L = 16;                 // samples per unit length per dimension
  double c = 0.0;             // bandlimit (radians)
  double T = 10.0;            // truncation parameter
  double eps_nystrom = 1e-12; // radial eigenproblem resolution tolerance
  double theta_q = 1e-15;     // quadrature target accuracy

  // c = ratio * pi * L.
  static BandParams nyquist(int L, double ratio = 1.0, double T = 10.0);

  // Throws ConfigError on violated constraints.
  void validate() const;
};

}  // namespace spca
