#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace stf {

// arccosh(1 + u) for u >= 0, stable near u = 0.
inline double acosh1p(double u) {
    if (u < 0) u = 0;
    return std::log1p(u + std::sqrt(u * (u + 2.0)));
}

// arccosh with clamping for arguments pushed below 1 by roundoff.
inline double acosh_clamped(double z) { return acosh1p(z - 1.0); }

inline double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    double hi = v[k];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + k - 1, v.begin() + k);
    return 0.5 * (hi + v[k - 1]);
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::size_t k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

inline double mean(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// standard error of the mean
inline double std_error(std::span<const double> v) {
    if (v.size() < 2) return std::nan("");
    double m = mean(v), s2 = 0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(v.size() - 1);
    return std::sqrt(s2 / static_cast<double>(v.size()));
}

struct LineFit {
    double slope = 0, intercept = 0, slope_se = 0;
};

// least squares y = a + b x with the usual slope standard error
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit f;
    std::size_t n = x.size();
    if (n < 2) return f;
    double mx = mean(x), my = mean(y), sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - (f.intercept + f.slope * x[i]);
            ss += r * r;
        }
        f.slope_se = std::sqrt(ss / (static_cast<double>(n - 2) * sxx));
    }
    return f;
}

// Regularized lower incomplete gamma P(a, x), by series (x < a+1) or
// continued fraction. Standard Numerical-Recipes-style evaluation.
inline double gamma_p(double a, double x) {
    if (x <= 0) return 0;
    double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// chi-square upper tail p-value with k degrees of freedom
inline double chi2_pvalue(double stat, double dof) {
    return 1.0 - gamma_p(0.5 * dof, 0.5 * stat);
}

}  // namespace stf
