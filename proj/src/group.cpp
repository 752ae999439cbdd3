#include "stf/group.hpp"

#include <cmath>

namespace stf {

namespace {

bool is_sl2(const ModelParams& mp) { return mp.model != Model::SOn1; }

void require_finite(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite parameter");
}

}  // namespace

ModelParams ModelParams::son1(int n) {
    if (n < 2) throw std::invalid_argument("SOn1 needs n >= 2");
    return {n, Model::SOn1};
}

GroupElement GroupElement::identity(ModelParams mp) {
    GroupElement g;
    g.model = mp;
    if (!is_sl2(mp)) {
        int d = mp.mat_dim();
        g.big.assign(static_cast<std::size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i) g.at(i, i) = 1.0;
    }
    return g;
}

GroupElement make_diag(double t, ModelParams mp) {
    require_finite(t);
    GroupElement g = GroupElement::identity(mp);
    if (is_sl2(mp)) {
        g.m2[0] = std::exp(0.5 * t);
        g.m2[3] = std::exp(-0.5 * t);
    } else {
        int n = mp.n;
        g.at(n - 1, n - 1) = std::cosh(t);
        g.at(n - 1, n) = std::sinh(t);
        g.at(n, n - 1) = std::sinh(t);
        g.at(n, n) = std::cosh(t);
    }
    return g;
}

GroupElement make_unipotent(const std::vector<double>& x, ModelParams mp) {
    if (static_cast<int>(x.size()) != mp.n - 1)
        throw std::invalid_argument("unipotent parameter must lie in R^{n-1}");
    for (double v : x) require_finite(v);
    GroupElement g = GroupElement::identity(mp);
    if (mp.model == Model::SL2R) {
        g.m2[1] = x[0];
    } else if (mp.model == Model::SL2C) {
        g.m2[1] = cplx(x[0], x[1]);
    } else {
        int n = mp.n;
        double q = 0;
        for (double v : x) q += v * v;
        for (int i = 0; i < n - 1; ++i) {
            g.at(i, n - 1) = -x[i];
            g.at(i, n) = x[i];
            g.at(n - 1, i) = x[i];
            g.at(n, i) = x[i];
        }
        g.at(n - 1, n - 1) = 1.0 - 0.5 * q;
        g.at(n - 1, n) = 0.5 * q;
        g.at(n, n - 1) = -0.5 * q;
        g.at(n, n) = 1.0 + 0.5 * q;
    }
    return g;
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
    if (!(g.model == h.model)) throw std::invalid_argument("model mismatch in compose");
    if (is_sl2(g.model)) return mul_sl2(g, h);
    int d = g.model.mat_dim();
    GroupElement r = g;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int k = 0; k < d; ++k) s += g.at(i, k) * h.at(k, j);
            r.at(i, j) = s;
        }
    return r;
}

GroupElement inverse(const GroupElement& g) {
    GroupElement r = g;
    if (is_sl2(g.model)) {
        r.m2[0] = g.m2[3];
        r.m2[1] = -g.m2[1];
        r.m2[2] = -g.m2[2];
        r.m2[3] = g.m2[0];
        return r;
    }
    // g^{-1} = J g^T J with J = diag(1,...,1,-1)
    int d = g.model.mat_dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double sgn = ((i == d - 1) != (j == d - 1)) ? -1.0 : 1.0;
            r.at(i, j) = sgn * g.at(j, i);
        }
    return r;
}

double frobenius2(const GroupElement& g) {
    double s = 0;
    if (is_sl2(g.model)) {
        for (const cplx& z : g.m2) s += std::norm(z);
    } else {
        for (double v : g.big) s += v * v;
    }
    return s;
}

double defect(const GroupElement& g) {
    if (is_sl2(g.model)) {
        cplx det = g.m2[0] * g.m2[3] - g.m2[1] * g.m2[2];
        return std::abs(det - cplx(1));
    }
    int d = g.model.mat_dim();
    double worst = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int k = 0; k < d; ++k) {
                double sgn = (k == d - 1) ? -1.0 : 1.0;
                s += sgn * g.at(k, i) * g.at(k, j);
            }
            double target = (i == j) ? ((i == d - 1) ? -1.0 : 1.0) : 0.0;
            worst = std::max(worst, std::fabs(s - target));
        }
    return worst;
}

GroupElement renormalize(const GroupElement& g) {
    if (defect(g) >= 1e-3)
        throw numeric_error("group element drifted too far; renormalize more often");
    if (is_sl2(g.model)) {
        GroupElement r = g;
        cplx det = g.m2[0] * g.m2[3] - g.m2[1] * g.m2[2];
        cplx s = std::sqrt(det);
        for (cplx& z : r.m2) z /= s;
        return r;
    }
    // first-order correction g <- g (I - E/2), E = J g^T J g - I, iterated
    int d = g.model.mat_dim();
    GroupElement r = g;
    for (int pass = 0; pass < 4 && defect(r) > 1e-13; ++pass) {
        std::vector<double> e(static_cast<std::size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0;
                for (int k = 0; k < d; ++k) {
                    double sgn = ((k == d - 1) != (i == d - 1)) ? -1.0 : 1.0;
                    s += sgn * r.at(k, i) * r.at(k, j);
                }
                e[static_cast<std::size_t>(i) * d + j] = s - (i == j ? 1.0 : 0.0);
            }
        GroupElement nr = r;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = r.at(i, j);
                for (int k = 0; k < d; ++k)
                    s -= 0.5 * r.at(i, k) * e[static_cast<std::size_t>(k) * d + j];
                nr.at(i, j) = s;
            }
        r = nr;
    }
    return r;
}

double cartan_t(const GroupElement& g) {
    if (is_sl2(g.model)) {
        // Frobenius^2 = 2 cosh t for |det| = 1, with t the base displacement
        return acosh_clamped(0.5 * frobenius2(g));
    }
    double tr = frobenius2(g);  // = tr(g^T g), real entries
    return 0.5 * acosh_clamped(0.5 * (tr - (g.model.n - 1)));
}

IwasawaCoords iwasawa(const GroupElement& g) {
    IwasawaCoords c;
    const ModelParams& mp = g.model;
    if (mp.model == Model::SL2R) {
        double a = g.m2[0].real(), b = g.m2[1].real();
        double cc = g.m2[2].real(), d = g.m2[3].real();
        double den = cc * cc + d * d;
        double y = 1.0 / den;
        double x = (a * cc + b * d) / den;
        c.x = {x};
        c.t = std::log(y);
        c.k = compose(make_diag(-c.t, mp), compose(make_unipotent({-x}, mp), g));
    } else if (mp.model == Model::SL2C) {
        cplx cc = g.m2[2], d = g.m2[3];
        double den = std::norm(cc) + std::norm(d);
        double y = 1.0 / den;
        cplx z = (g.m2[0] * std::conj(cc) + g.m2[1] * std::conj(d)) / den;
        c.x = {z.real(), z.imag()};
        c.t = std::log(y);
        c.k = compose(make_diag(-c.t, mp), compose(inverse(make_unipotent(c.x, mp)), g));
    } else {
        // hyperboloid point p = g e_{n+1}; p_{n+1} - p_n = e^{-t}
        int n = mp.n;
        std::vector<double> p(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) p[static_cast<std::size_t>(i)] = g.at(i, n);
        double em = p[static_cast<std::size_t>(n)] - p[static_cast<std::size_t>(n) - 1];
        if (em <= 0) throw numeric_error("element not on the upper sheet");
        c.t = -std::log(em);
        c.x.resize(static_cast<std::size_t>(n) - 1);
        for (int i = 0; i < n - 1; ++i) c.x[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] / em;
        c.k = compose(make_diag(-c.t, mp), compose(inverse(make_unipotent(c.x, mp)), g));
    }
    return c;
}

GroupElement recompose(const IwasawaCoords& c, ModelParams mp) {
    return compose(make_unipotent(c.x, mp), compose(make_diag(c.t, mp), c.k));
}

namespace {

// 2x2 Hermitian eigen-decomposition helper for the SL2 Cartan decomposition.
// Returns k1 with unit determinant whose columns are eigenvectors of g g^*.
GroupElement polar_k1(const GroupElement& g, double t) {
    // S = g g^*; its larger eigenvalue is e^t
    cplx s00 = g.m2[0] * std::conj(g.m2[0]) + g.m2[1] * std::conj(g.m2[1]);
    cplx s01 = g.m2[0] * std::conj(g.m2[2]) + g.m2[1] * std::conj(g.m2[3]);
    double a = s00.real();
    double lam = std::exp(t);
    GroupElement k1 = GroupElement::identity(g.model);
    // eigenvector (s01, lam - a) unless degenerate
    cplx v0 = s01;
    cplx v1 = cplx(lam - a, 0.0);
    double nv = std::sqrt(std::norm(v0) + std::norm(v1));
    if (nv < 1e-14) return k1;  // g g^* ~ identity, any k1 works
    v0 /= nv;
    v1 /= nv;
    // second column orthogonal, chosen so det k1 = 1
    k1.m2[0] = v0;
    k1.m2[2] = v1;
    k1.m2[1] = -std::conj(v1);
    k1.m2[3] = std::conj(v0);
    return k1;
}

GroupElement adjoint(const GroupElement& g) {
    GroupElement r = g;
    r.m2[0] = std::conj(g.m2[0]);
    r.m2[1] = std::conj(g.m2[2]);
    r.m2[2] = std::conj(g.m2[1]);
    r.m2[3] = std::conj(g.m2[3]);
    return r;
}

}  // namespace

CartanCoords cartan(const GroupElement& g) {
    CartanCoords c;
    c.t = cartan_t(g);
    const ModelParams& mp = g.model;
    if (is_sl2(mp)) {
        c.k1 = polar_k1(g, c.t);
        c.k2 = compose(make_diag(-c.t, mp), compose(adjoint(c.k1), g));
        return c;
    }
    int n = mp.n;
    c.k1 = GroupElement::identity(mp);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = g.at(i, n);
    double s = std::sinh(c.t);
    if (s > 1e-12) {
        // rotation in SO(n) taking e_n to p/|p|
        std::vector<double> w(p);
        for (double& v : w) v /= s;
        std::vector<double> u(static_cast<std::size_t>(n), 0.0);
        u[static_cast<std::size_t>(n) - 1] = 1.0;
        double cth = w[static_cast<std::size_t>(n) - 1];
        std::vector<double> v(w);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= cth * u[static_cast<std::size_t>(i)];
        double nv = 0;
        for (double q : v) nv += q * q;
        nv = std::sqrt(nv);
        if (nv > 1e-14) {
            for (double& q : v) q /= nv;
            double sth = nv;  // |w - (w.u)u| = sin(theta)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double r = (i == j ? 1.0 : 0.0);
                    r += (cth - 1.0) * (u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(j)] +
                                        v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
                    r += sth * (v[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(j)] -
                                u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
                    c.k1.at(i, j) = r;
                }
        } else if (cth < 0) {
            // w = -e_n: rotate by pi in the (e_1, e_n) plane
            c.k1.at(0, 0) = -1.0;
            c.k1.at(n - 1, n - 1) = -1.0;
        }
    }
    c.k2 = compose(make_diag(-c.t, mp), compose(inverse(c.k1), g));
    return c;
}

GroupElement recompose(const CartanCoords& c) {
    return compose(c.k1, compose(make_diag(c.t, c.k1.model), c.k2));
}

LogScaled LogScaled::from(const GroupElement& g) {
    LogScaled s;
    s.unit = g;
    double f = std::sqrt(frobenius2(g));
    s.log_scale = std::log(f);
    if (g.model.model != Model::SOn1) {
        for (cplx& z : s.unit.m2) z /= f;
    } else {
        for (double& v : s.unit.big) v /= f;
    }
    return s;
}

LogScaled scaled_mul(const LogScaled& a, const GroupElement& b) {
    LogScaled r = LogScaled::from(compose(a.unit, b));
    r.log_scale += a.log_scale;
    return r;
}

double cartan_t(const LogScaled& g) {
    // true Frobenius^2 = e^{2 log_scale} (unit norm = 1)
    double lf2 = 2.0 * g.log_scale;  // log of Frobenius^2
    if (g.unit.model.model != Model::SOn1) {
        // t = acosh(F2/2)
        if (lf2 < 60.0) return acosh_clamped(0.5 * std::exp(lf2));
        return lf2 - std::log(2.0) + std::log1p(std::sqrt(1.0 - 4.0 * std::exp(-2.0 * lf2)));
    }
    double nm1 = g.unit.model.n - 1;
    if (lf2 < 60.0) return 0.5 * acosh_clamped(0.5 * (std::exp(lf2) - nm1));
    // 2 cosh(2t) ~ F2, so 2t ~ log(F2)
    return 0.5 * lf2;
}

}  // namespace stf
