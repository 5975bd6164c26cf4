// Bessel functions of the first kind, integer order

#pragma once

#include <vector>

namespace wga {

// J_l(x) for integer l (negative allowed) and |x| < 1e4. Miller downward
// recurrence normalised by J_0 + 2 sum_k J_2k = 1. Throws RangeError outside
// the supported domain.
double bessel_j(int order, double x);

// J_0(x) ... J_max_order(x) from a single recurrence pass.
std::vector<double> bessel_j_sequence(int max_order, double x);

}  // namespace wga
