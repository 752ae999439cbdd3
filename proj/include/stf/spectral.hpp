#pragma once

#include <complex>
#include <span>

#include "stf/mathutil.hpp"

namespace stf {

// K-bi-invariant spherical function phi_s(a_t) for Isom(H^n), normalized so
// phi_s(a_0) = 1.  s purely imaginary: tempered principal series; s real in
// (0, rho]: complementary / trivial.
std::complex<double> spherical_fn(std::complex<double> s, double t, int n);

struct EnvelopeFit {
    double slope = 0;      // least-squares slope of log|phi| vs t
    double slope_se = 0;
    double envelope = 0;   // real s: exp(intercept); imaginary s: sup |phi| e^{rho t}/t
};

EnvelopeFit decay_envelope_check(std::complex<double> s, std::span<const double> t_grid, int n);

}  // namespace stf
