#pragma once

#include <span>
#include <vector>

namespace spca {

// Bessel functions of the first kind of integer order via normalized backward
// recurrence (Miller's algorithm with J0 + 2*sum J_2k = 1 for the sign and
// J0^2 + 2*sum J_k^2 = 1 for the scale).

// out[k] = J_{lo + k}(x) for k = 0 .. hi - lo. Requires 0 <= lo <= hi.
void bessel_j_range(double x, int lo, int hi, std::span<double> out);

// J_0(x) .. J_max_order(x).
std::vector<double> bessel_j_orders(double x, int max_order);

// J_n(x) for any integer n.
double bessel_j(int n, double x);

}  // namespace spca
