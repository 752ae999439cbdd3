#include "stf/spectral.hpp"

#include <cmath>
#include <vector>

#include "stf/quadrature.hpp"

namespace stf {

namespace {

using cxd = std::complex<double>;

// cosh t + sinh t cos(theta) evaluated without cancellation near theta = pi:
// equals e^{-t} + sinh(t) (1 + cos theta), and 1 + cos theta = 2 cos^2(theta/2)
inline double radial_base(double t, double half_theta_cos2) {
    return std::exp(-t) + 2.0 * std::sinh(t) * half_theta_cos2;
}

}  // namespace

cxd spherical_fn(cxd s, double t, int n) {
    if (t < 0) throw std::invalid_argument("spherical_fn needs t >= 0");
    if (n < 2) throw std::invalid_argument("spherical_fn needs n >= 2");
    double rho = 0.5 * (n - 1);
    if (t == 0) return 1.0;

    cxd ex = s - rho;
    // expected magnitude of the answer, for a meaningful absolute tolerance
    double decay = std::min(s.real(), rho) - rho;
    double scale = std::exp(decay * t) * std::max(t, 1.0);

    auto integrand = [&](double theta) -> cxd {
        double c2 = std::cos(0.5 * theta);
        double base = radial_base(t, c2 * c2);
        cxd v = std::exp(ex * std::log(base));
        if (n > 2) v *= std::pow(std::sin(theta), n - 2);
        return v;
    };

    // bulk on [0, pi - 0.1]; the boundary layer at theta = pi has width
    // ~ e^{-t}, so it is integrated in the log variable theta = pi - 0.1 e^{-w}
    double den = n == 2 ? M_PI : std::sqrt(M_PI) * std::exp(std::lgamma(0.5 * (n - 1)) -
                                                            std::lgamma(0.5 * n));
    // floor at the roundoff level of the interval, else deep targets can
    // never converge
    double tol = std::max(1e-10 * scale * den, 5e-14 * (1.0 + t));
    cxd bulk = integrate_adaptive<cxd>(integrand, 0.0, M_PI - 0.1, tol);
    auto tail = [&](double w) -> cxd {
        double tp = 0.1 * std::exp(-w);  // pi - theta
        return integrand(M_PI - tp) * tp;
    };
    cxd tail_val = integrate_adaptive<cxd>(tail, 0.0, t + 40.0, tol);
    return (bulk + tail_val) / den;
}

EnvelopeFit decay_envelope_check(cxd s, std::span<const double> t_grid, int n) {
    double rho = 0.5 * (n - 1);
    EnvelopeFit fit;
    std::vector<double> ts, logs;
    double env = 0;
    for (double t : t_grid) {
        double a = std::abs(spherical_fn(s, t, n));
        ts.push_back(t);
        logs.push_back(std::log(a));
        env = std::max(env, a * std::exp(rho * t) / std::max(t, 1e-12));
    }
    LineFit lf = fit_line(ts, logs);
    fit.slope = lf.slope;
    fit.slope_se = lf.slope_se;
    fit.envelope = s.imag() == 0.0 ? std::exp(lf.intercept) : env;
    return fit;
}

}  // namespace stf
