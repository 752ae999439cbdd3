#pragma once

#include <cmath>
#include <complex>
#include <cstddef>

#include "stf/errors.hpp"

namespace stf {

// Adaptive Gauss-Kronrod 7/15 on [a, b].  F maps double -> double or
// std::complex<double>.  Splits until the local K15-G7 discrepancy is below
// the tolerance share for the subinterval.
namespace gk {

// nodes/weights for the Kronrod 15 rule (positive half; symmetric)
inline constexpr double xk[8] = {
    0.0,                    0.2077849550078985,  0.4058451513773972,
    0.5860872354676911,     0.7415311855993945,  0.8648644233597691,
    0.9491079123427585,     0.9914553711208126};
inline constexpr double wk[8] = {
    0.2094821410847278,     0.2044329400752989,  0.1903505780647854,
    0.1690047266392679,     0.1406532597155259,  0.1047900103222502,
    0.0630920926299786,     0.0229353220105292};
// Gauss 7 weights on the shared nodes (xk[0], xk[2], xk[4], xk[6])
inline constexpr double wg[4] = {
    0.4179591836734694,     0.3818300505051189,  0.2797053914892767,
    0.1294849661688697};

}  // namespace gk

template <typename F, typename R>
void gk15(F&& f, double a, double b, R& kronrod, double& err) {
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    R fc = f(c);
    R k = gk::wk[0] * fc;
    R g = gk::wg[0] * fc;
    for (int i = 1; i < 8; ++i) {
        R lo = f(c - h * gk::xk[i]);
        R hi = f(c + h * gk::xk[i]);
        k += gk::wk[i] * (lo + hi);
        if (i % 2 == 0) g += gk::wg[i / 2] * (lo + hi);
    }
    kronrod = h * k;
    err = std::abs(h * (k - g));
}

template <typename R, typename F>
R integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_depth = 40) {
    struct Seg {
        double a, b, tol;
        int depth;
    };
    // explicit stack; worst case 2^depth segments but tolerance splitting
    // terminates far earlier in practice
    Seg stack[2048];
    int top = 0;
    stack[top++] = {a, b, abs_tol, 0};
    R total{};
    double residual_err = 0;
    while (top > 0) {
        Seg s = stack[--top];
        R val;
        double err;
        gk15(f, s.a, s.b, val, err);
        if (err <= s.tol || s.depth >= max_depth || top > 2040) {
            total += val;
            residual_err += err;
        } else {
            // children get slightly more than half each; the global check
            // below is what enforces abs_tol
            double m = 0.5 * (s.a + s.b);
            stack[top++] = {s.a, m, 0.6 * s.tol, s.depth + 1};
            stack[top++] = {m, s.b, 0.6 * s.tol, s.depth + 1};
        }
    }
    if (residual_err > abs_tol)
        throw precision_error("quadrature failed to converge", residual_err);
    return total;
}

inline double integrate(double (*f)(double, const void*), const void* ctx, double a, double b,
                        double abs_tol) {
    auto wrapped = [&](double x) { return f(x, ctx); };
    return integrate_adaptive<double>(wrapped, a, b, abs_tol);
}

}  // namespace stf
