#include "stf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stf/quadrature.hpp"

namespace stf {

BasePoint mobius(const GroupElement& g, const BasePoint& p) {
    BasePoint r;
    if (g.model.model == Model::SL2R) {
        double a = g.m2[0].real(), b = g.m2[1].real();
        double c = g.m2[2].real(), d = g.m2[3].real();
        double u = c * p.x1 + d, v = c * p.y;
        double den = u * u + v * v;
        r.y = p.y / den;
        r.x1 = ((a * p.x1 + b) * u + a * c * p.y * p.y) / den;
        r.x2 = 0;
        return r;
    }
    if (g.model.model == Model::SL2C) {
        cplx z(p.x1, p.x2);
        cplx czd = g.m2[2] * z + g.m2[3];
        double den = std::norm(czd) + std::norm(g.m2[2]) * p.y * p.y;
        cplx zn = ((g.m2[0] * z + g.m2[1]) * std::conj(czd) +
                   g.m2[0] * std::conj(g.m2[2]) * p.y * p.y) /
                  den;
        r.x1 = zn.real();
        r.x2 = zn.imag();
        r.y = p.y / den;
        return r;
    }
    throw std::invalid_argument("mobius: SOn1 model has no built-in quotient");
}

namespace {

// row operations on the 2x2 representative, tracking base point updates
inline void left_translate(GroupElement& g, cplx k) {
    // [[1,-k],[0,1]] * g
    g.m2[0] -= k * g.m2[2];
    g.m2[1] -= k * g.m2[3];
}

inline void left_invert(GroupElement& g) {
    // [[0,-1],[1,0]] * g
    std::swap(g.m2[0], g.m2[2]);
    std::swap(g.m2[1], g.m2[3]);
    g.m2[0] = -g.m2[0];
    g.m2[1] = -g.m2[1];
}

inline void left_unit_fold(GroupElement& g) {
    // [[i,0],[0,-i]] * g  (base z -> -z)
    g.m2[0] *= cplx(0, 1);
    g.m2[1] *= cplx(0, 1);
    g.m2[2] *= cplx(0, -1);
    g.m2[3] *= cplx(0, -1);
}

// deterministic nearest integer, ties toward +inf
inline double round_tie_up(double x) { return std::floor(x + 0.5); }

GroupElement psl_canonical(GroupElement g) {
    // normalize the overall +-1 so equal cosets compare equal
    for (const cplx& z : g.m2) {
        if (std::abs(z) > 1e-9) {
            bool flip = z.real() < -1e-12 || (std::fabs(z.real()) <= 1e-12 && z.imag() < 0);
            if (flip)
                for (cplx& w : g.m2) w = -w;
            break;
        }
    }
    return g;
}

std::array<long long, 8> dedup_key(const GroupElement& g) {
    std::array<long long, 8> k{};
    for (int i = 0; i < 4; ++i) {
        k[static_cast<std::size_t>(2 * i)] = std::llround(g.m2[static_cast<std::size_t>(i)].real() * 1e6);
        k[static_cast<std::size_t>(2 * i) + 1] = std::llround(g.m2[static_cast<std::size_t>(i)].imag() * 1e6);
    }
    return k;
}

double modular_covolume() {
    // area of {|x| <= 1/2, |z| >= 1} for dx dy / y^2
    auto f = [](double x) { return 1.0 / std::sqrt(1.0 - x * x); };
    return integrate_adaptive<double>(f, -0.5, 0.5, 1e-12);
}

double picard_covolume() {
    // volume of the Picard domain for dx1 dx2 dy / y^3; inner x2 and y
    // integrals are elementary
    auto f = [](double x1) {
        double a = std::sqrt(1.0 - x1 * x1);
        return std::log((a + 0.5) / (a - 0.5)) / (4.0 * a);
    };
    return integrate_adaptive<double>(f, -0.5, 0.5, 1e-12);
}

}  // namespace

Lattice::Lattice(LatticeName nm) : name(nm) {
    if (nm == LatticeName::Modular) {
        model = ModelParams::sl2r();
        covolume_ = modular_covolume();
        y_floor_ = std::sqrt(3.0) / 2.0;
        GroupElement t = make_unipotent({1}, model);
        GroupElement s = GroupElement::identity(model);
        s.m2 = {cplx(0), cplx(-1), cplx(1), cplx(0)};
        gens_ = {t, inverse(t), s};
    } else {
        model = ModelParams::sl2c();
        covolume_ = picard_covolume();
        y_floor_ = std::sqrt(0.5);
        GroupElement t1 = make_unipotent({1, 0}, model);
        GroupElement ti = make_unipotent({0, 1}, model);
        GroupElement s = GroupElement::identity(model);
        s.m2 = {cplx(0), cplx(-1), cplx(1), cplx(0)};
        GroupElement u = GroupElement::identity(model);
        u.m2 = {cplx(0, 1), cplx(0), cplx(0), cplx(0, -1)};
        gens_ = {t1, inverse(t1), ti, inverse(ti), s, u};
    }
}

const Lattice& Lattice::modular() {
    static const Lattice lat(LatticeName::Modular);
    return lat;
}

const Lattice& Lattice::picard() {
    static const Lattice lat(LatticeName::Picard);
    return lat;
}

const std::vector<GroupElement>& Lattice::word_ball(int radius) const {
    if (radius < 0) throw std::invalid_argument("word_ball: negative radius");
    if (static_cast<int>(balls_.size()) > radius && !balls_[static_cast<std::size_t>(radius)].empty())
        return balls_[static_cast<std::size_t>(radius)];
    if (static_cast<int>(balls_.size()) <= radius) balls_.resize(static_cast<std::size_t>(radius) + 1);

    std::map<std::array<long long, 8>, GroupElement> seen;
    std::vector<GroupElement> frontier = {GroupElement::identity(model)};
    seen[dedup_key(frontier[0])] = frontier[0];
    for (int len = 1; len <= radius; ++len) {
        std::vector<GroupElement> next;
        for (const GroupElement& w : frontier)
            for (const GroupElement& g : gens_) {
                GroupElement c = psl_canonical(compose(g, w));
                auto key = dedup_key(c);
                if (seen.emplace(key, c).second) next.push_back(c);
            }
        frontier = std::move(next);
    }
    auto& out = balls_[static_cast<std::size_t>(radius)];
    out.clear();
    for (auto& [k, g] : seen) out.push_back(g);
    return out;
}

bool Lattice::in_domain(const BasePoint& p, double tol) const {
    if (std::fabs(p.x1) > 0.5 + tol) return false;
    double q2 = p.x1 * p.x1 + p.x2 * p.x2 + p.y * p.y;
    if (q2 < 1.0 - tol) return false;
    if (name == LatticeName::Picard && (p.x2 < -tol || p.x2 > 0.5 + tol)) return false;
    return true;
}

QuotientPoint reduce(const GroupElement& g, const Lattice& lat, bool keep_log) {
    if (!(g.model == lat.model))
        throw std::invalid_argument("reduce: element model does not match lattice");
    QuotientPoint p;
    p.lat = &lat;
    p.rep = g;
    const bool picard = lat.name == LatticeName::Picard;
    BasePoint b = mobius(g, lat.base_point());
    long moves = 0;
    const long guard = 1000000;
    for (;;) {
        // translate first (ties broken toward |Re| <= 1/2), then invert
        double k1 = round_tie_up(b.x1);
        double k2 = picard ? round_tie_up(b.x2) : 0.0;
        if (k1 != 0.0 || k2 != 0.0) {
            left_translate(p.rep, cplx(k1, k2));
            b.x1 -= k1;
            b.x2 -= k2;
            if (keep_log) p.word_log.push_back(k2 != 0.0 ? 1 : 0);
        }
        double q2 = b.x1 * b.x1 + b.x2 * b.x2 + b.y * b.y;
        if (q2 < 1.0 - 1e-12) {
            left_invert(p.rep);
            // q -> -1/q: z -> -conj(z)/|q|^2, y -> y/|q|^2
            b.x1 = -b.x1 / q2;
            b.x2 = b.x2 / q2;
            b.y = b.y / q2;
            if (keep_log) p.word_log.push_back(2);
        } else {
            break;
        }
        if (++moves > guard) throw numeric_error("reduction failed to terminate");
    }
    if (picard && b.x2 < 0.0) {
        left_unit_fold(p.rep);
        b.x1 = -b.x1;
        b.x2 = -b.x2;
        if (keep_log) p.word_log.push_back(3);
    }
    p.base = b;
    return p;
}

double quotient_distance(const QuotientPoint& p, const QuotientPoint& q, int word_radius) {
    if (p.lat != q.lat) throw std::invalid_argument("quotient_distance: different lattices");
    double best = 1e300;
    for (const GroupElement& g : p.lat->word_ball(word_radius)) {
        double c = cosh_dist(p.base, mobius(g, q.base));
        if (c < best) best = c;
    }
    return acosh_clamped(best);
}

std::vector<BasePoint> translates_of(const QuotientPoint& q, int word_radius) {
    std::vector<BasePoint> out;
    for (const GroupElement& g : q.lat->word_ball(word_radius)) out.push_back(mobius(g, q.base));
    return out;
}

double embedding_radius(const QuotientPoint& center, int word_radius) {
    double best = 1e300;
    for (const GroupElement& g : center.lat->word_ball(word_radius)) {
        // skip only the identity coset; a nontrivial elliptic element fixing
        // the center legitimately forces the radius to zero
        double id_dist = 0;
        for (int i = 0; i < 4; ++i) {
            cplx want = (i == 0 || i == 3) ? cplx(1) : cplx(0);
            id_dist = std::max(id_dist, std::abs(g.m2[static_cast<std::size_t>(i)] - want));
        }
        if (id_dist < 1e-9) continue;
        best = std::min(best, hyp_dist(center.base, mobius(g, center.base)));
    }
    return 0.5 * best;
}

}  // namespace stf
