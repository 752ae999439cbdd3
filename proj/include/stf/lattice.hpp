#pragma once

#include <cstdint>
#include <vector>

#include "stf/group.hpp"

namespace stf {

// Base-manifold point in upper half-space coordinates.  n = 2 uses (x1, y),
// n = 3 uses (x1, x2, y) for the quaternion z + yj with z = x1 + i x2.
struct BasePoint {
    double x1 = 0, x2 = 0, y = 1;
};

enum class LatticeName { Modular, Picard };

class Lattice;

struct QuotientPoint {
    GroupElement rep;
    BasePoint base;  // projection of rep, cached at reduction time
    const Lattice* lat = nullptr;
    std::vector<std::int8_t> word_log;  // reduction moves, only if requested
};

// Hyperbolic cosh-distance between base points (cheap form for comparisons).
inline double cosh_dist(const BasePoint& p, const BasePoint& q) {
    double dx1 = p.x1 - q.x1, dx2 = p.x2 - q.x2, dy = p.y - q.y;
    return 1.0 + (dx1 * dx1 + dx2 * dx2 + dy * dy) / (2.0 * p.y * q.y);
}

inline double hyp_dist(const BasePoint& p, const BasePoint& q) {
    return acosh_clamped(cosh_dist(p, q));
}

// Mobius action of an SL2 element on the base point.
BasePoint mobius(const GroupElement& g, const BasePoint& p);

// The two built-in lattices: PSL(2,Z) on H^2 and the Picard group
// PSL(2,Z[i]) on H^3.
class Lattice {
  public:
    static const Lattice& modular();
    static const Lattice& picard();

    LatticeName name;
    ModelParams model;

    double covolume() const { return covolume_; }
    double y_floor() const { return y_floor_; }
    BasePoint base_point() const { return BasePoint{0, 0, 1}; }

    const std::vector<GroupElement>& generators() const { return gens_; }

    // All distinct coset representatives of words of length <= radius in the
    // generators (cached; PSL sign normalized).
    const std::vector<GroupElement>& word_ball(int radius) const;

    bool in_domain(const BasePoint& p, double tol = 1e-9) const;

  private:
    explicit Lattice(LatticeName nm);
    double covolume_ = 0, y_floor_ = 0;
    std::vector<GroupElement> gens_;
    mutable std::vector<std::vector<GroupElement>> balls_;  // by radius
};

// Left-translate g into the fundamental domain.  Set keep_log to record the
// reduction moves (codes: 0 = translate-x1, 1 = translate-x2, 2 = invert,
// 3 = unit fold).
QuotientPoint reduce(const GroupElement& g, const Lattice& lat, bool keep_log = false);

// Distance on the quotient manifold: min over the word ball of the base
// distance.  Exact for pairs closer than the embedding scale.
double quotient_distance(const QuotientPoint& p, const QuotientPoint& q, int word_radius = 2);

// log-height of the reduced representative; equals d(p, base) + O(1) high in
// the cusp.
inline double cusp_height(const QuotientPoint& p) { return std::log(p.base.y); }

// Precomputed translate list of a fixed point, for tight distance loops.
std::vector<BasePoint> translates_of(const QuotientPoint& q, int word_radius = 2);

inline double min_cosh_dist(const BasePoint& p, const std::vector<BasePoint>& translates) {
    double best = 1e300;
    for (const BasePoint& w : translates) {
        double c = cosh_dist(p, w);
        if (c < best) best = c;
    }
    return best;
}

// Half the minimal displacement of the center over nontrivial words; balls of
// smaller radius embed, so their measure is the hyperbolic ball volume.
double embedding_radius(const QuotientPoint& center, int word_radius = 3);

}  // namespace stf
