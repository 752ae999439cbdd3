#pragma once

#include <cmath>
#include <vector>

#include "stf/group.hpp"
#include "stf/rng.hpp"

namespace stf::testutil {

// random element of K for each model: SO(2), SU(2), or SO(n) x {1}
inline GroupElement random_k(ModelParams mp, Rng& rng) {
    GroupElement k = GroupElement::identity(mp);
    if (mp.model == Model::SL2R) {
        double th = rng.uniform(0, 6.283185307179586);
        k.m2 = {cplx(std::cos(th)), cplx(-std::sin(th)), cplx(std::sin(th)), cplx(std::cos(th))};
        return k;
    }
    if (mp.model == Model::SL2C) {
        // uniform SU(2) from a normalized Gaussian quaternion
        double q0 = rng.normal(), q1 = rng.normal(), q2 = rng.normal(), q3 = rng.normal();
        double nq = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
        q0 /= nq; q1 /= nq; q2 /= nq; q3 /= nq;
        k.m2 = {cplx(q0, q1), cplx(q2, q3), cplx(-q2, q3), cplx(q0, -q1)};
        return k;
    }
    // product of Givens rotations over all coordinate planes of R^n
    int n = mp.n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double th = rng.uniform(0, 6.283185307179586);
            GroupElement giv = GroupElement::identity(mp);
            giv.at(i, i) = std::cos(th);
            giv.at(j, j) = std::cos(th);
            giv.at(i, j) = -std::sin(th);
            giv.at(j, i) = std::sin(th);
            k = compose(k, giv);
        }
    return k;
}

// generic bounded element n_x a_t k
inline GroupElement random_g(ModelParams mp, Rng& rng, double scale = 2.0) {
    std::vector<double> x(static_cast<std::size_t>(mp.n) - 1);
    for (double& v : x) v = rng.uniform(-scale, scale);
    double t = rng.uniform(-scale, scale);
    return compose(make_unipotent(x, mp),
                   compose(make_diag(t, mp), random_k(mp, rng)));
}

inline double max_entry_diff(const GroupElement& g, const GroupElement& h) {
    double worst = 0;
    if (g.model.model != Model::SOn1) {
        for (int i = 0; i < 4; ++i)
            worst = std::max(worst, std::abs(g.m2[static_cast<std::size_t>(i)] -
                                             h.m2[static_cast<std::size_t>(i)]));
    } else {
        for (std::size_t i = 0; i < g.big.size(); ++i)
            worst = std::max(worst, std::fabs(g.big[i] - h.big[i]));
    }
    return worst;
}

}  // namespace stf::testutil
