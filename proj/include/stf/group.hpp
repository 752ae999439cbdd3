#pragma once

#include <array>
#include <complex>
#include <vector>

#include "stf/errors.hpp"
#include "stf/mathutil.hpp"

namespace stf {

using cplx = std::complex<double>;

enum class Model { SL2R, SL2C, SOn1 };

// Which matrix realization of Isom(H^n) we work in.  SL(2,R) for n = 2,
// SL(2,C) for n = 3, and the (n+1)x(n+1) matrices preserving
// x_1^2 + ... + x_n^2 - x_{n+1}^2 for general n.
struct ModelParams {
    int n = 2;
    Model model = Model::SL2R;

    double rho() const { return 0.5 * (n - 1); }
    int mat_dim() const { return model == Model::SOn1 ? n + 1 : 2; }

    static ModelParams sl2r() { return {2, Model::SL2R}; }
    static ModelParams sl2c() { return {3, Model::SL2C}; }
    static ModelParams son1(int n);

    bool operator==(const ModelParams&) const = default;
};

// An isometry.  SL2 models use the fixed 2x2 complex block (imaginary parts
// zero for SL2R); the SOn1 model stores a dense real matrix.
struct GroupElement {
    ModelParams model;
    std::array<cplx, 4> m2{cplx(1), cplx(0), cplx(0), cplx(1)};  // row-major
    std::vector<double> big;  // SOn1 only, (n+1)^2 row-major

    static GroupElement identity(ModelParams mp);

    double& at(int i, int j) { return big[static_cast<std::size_t>(i) * model.mat_dim() + j]; }
    double at(int i, int j) const { return big[static_cast<std::size_t>(i) * model.mat_dim() + j]; }
};

struct IwasawaCoords {
    std::vector<double> x;  // R^{n-1}
    double t = 0;           // log-height
    GroupElement k;
};

struct CartanCoords {
    GroupElement k1, k2;
    double t = 0;  // >= 0
};

GroupElement make_diag(double t, ModelParams mp);
GroupElement make_unipotent(const std::vector<double>& x, ModelParams mp);
GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);

// Squared Frobenius norm tr(g^* g).
double frobenius2(const GroupElement& g);

// Distance from the constraint manifold: |det-1| for SL2, the max entry of
// g^T J g - J for SOn1.
double defect(const GroupElement& g);

// Project back onto the group.  Throws numeric_error if the defect is
// already >= 1e-3 (the orbit loop must renormalize more often).
GroupElement renormalize(const GroupElement& g);

// Cartan radial coordinate, equal to the hyperbolic displacement of the base
// point.  Clamped to 0 under roundoff near the identity.
double cartan_t(const GroupElement& g);

IwasawaCoords iwasawa(const GroupElement& g);
GroupElement recompose(const IwasawaCoords& c, ModelParams mp);

CartanCoords cartan(const GroupElement& g);
GroupElement recompose(const CartanCoords& c);

// --- log-scaled elements -------------------------------------------------
//
// Long diagonalizable products overflow doubles near t ~ 700; tracking the
// matrix at unit Frobenius norm with a separate log-scale keeps cartan_t
// computable for arbitrarily long products.
struct LogScaled {
    GroupElement unit;   // Frobenius norm 1
    double log_scale{};  // true matrix = e^{log_scale} * unit

    static LogScaled from(const GroupElement& g);
};

LogScaled scaled_mul(const LogScaled& a, const GroupElement& b);
double cartan_t(const LogScaled& g);

// --- inline hot-path helpers ---------------------------------------------

inline GroupElement mul_sl2(const GroupElement& g, const GroupElement& h) {
    GroupElement r;
    r.model = g.model;
    r.m2[0] = g.m2[0] * h.m2[0] + g.m2[1] * h.m2[2];
    r.m2[1] = g.m2[0] * h.m2[1] + g.m2[1] * h.m2[3];
    r.m2[2] = g.m2[2] * h.m2[0] + g.m2[3] * h.m2[2];
    r.m2[3] = g.m2[2] * h.m2[1] + g.m2[3] * h.m2[3];
    return r;
}

}  // namespace stf
