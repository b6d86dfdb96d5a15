#pragma once

#include <cstdint>

#include "spca/expand.hpp"
#include "spca/pswf_basis.hpp"

namespace spca {

struct SynthConfig {
  int count = 100;
  int side = 0;              // 0: 2L+1
  std::uint64_t seed = 1;
  double eps_space = 0.0;    // L2 norm placed outside the unit disk, per image
  double delta_c = 0.0;      // L2 norm of the Fourier transform beyond c, per image
  double decay = 0.25;       // coefficient std exp(-(N + n) / (decay L))
  double mean_scale = 1.0;   // size of the shared N = 0 mean
};

struct SynthResult {
  ImageStack stack;
  CoefficientSet truth;           // ground-truth coefficients of the in-span part
  double eps_injected = 0.0;      // largest measured out-of-disk L2 norm of the added noise
  double eps_leakage = 0.0;       // largest PSWF energy outside the disk, sqrt(sum m |g|^2 (1 - |lambda|^2)) / L
  double eps_effective = 0.0;     // bound on the space concentration of every image
  double delta_effective = 0.0;   // bound on the frequency concentration of every image
};

// Images I_m = sum g psi_hat inside the disk, plus noise outside the disk with
// L2 norm eps_space and a high-pass component supported on |omega| > c with
// Fourier-side norm delta_c. Deterministic for a fixed seed.
SynthResult synth_stack(const SynthConfig& config, const PswfBasis& basis);

}  // namespace spca
