#include "spca/band_params.hpp"

#include <numbers>
#include <sstream>

#include "spca/error.hpp"

namespace spca {

BandParams BandParams::nyquist(int L, double ratio, double T) {
  BandParams p;
  p.L = L;
  p.c = ratio * std::numbers::pi * L;
  p.T = T;
  return p;
}

void BandParams::validate() const {
  std::ostringstream msg;
  if (L < 1) msg << "L must be positive (got " << L << "); ";
  if (!(c > 0.0) || c > std::numbers::pi * L * (1.0 + 1e-12)) msg << "bandlimit must satisfy 0 < c <= pi*L (got " << c << "); ";
  if (!(T > 0.0)) msg << "T must be positive; ";
  if (!(eps_nystrom > 0.0 && eps_nystrom < 1.0)) msg << "eps_nystrom must lie in (0,1); ";
  if (!(theta_q > 0.0 && theta_q < 1.0)) msg << "theta_q must lie in (0,1); ";
  const auto s = msg.str();
  if (!s.empty()) throw ConfigError("invalid band parameters: " + s.substr(0, s.size() - 2));
}

}  // namespace spca
