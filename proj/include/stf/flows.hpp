#pragma once

#include <functional>
#include <vector>

#include "stf/lattice.hpp"

namespace stf {

// A discrete one-parameter diagonalizable flow tau^{-1} a_{cm} tau, or a
// rank-d unipotent Z^d action m -> n_{sum m_i b_i}.
struct FlowSpec {
    enum class Kind { Diagonalizable, Unipotent };
    Kind kind = Kind::Diagonalizable;
    ModelParams model;
    double c = 1.0;              // diagonalizable step
    GroupElement conjugator;     // diagonalizable only
    int rank = 1;                // unipotent only
    std::vector<std::vector<double>> basis;  // unipotent, rank vectors in R^{n-1}

    static FlowSpec diagonalizable(double c, ModelParams mp);
    static FlowSpec diagonalizable(double c, const GroupElement& conjugator);
    static FlowSpec unipotent(int rank, ModelParams mp);  // standard basis
    static FlowSpec unipotent(const std::vector<std::vector<double>>& basis, ModelParams mp);
};

GroupElement flow_element(const FlowSpec& spec, const std::vector<long>& k);
GroupElement flow_element(const FlowSpec& spec, long k);  // rank-1 shortcut

// Sequential orbit iteration x g_1, x g_2, ... on the quotient; the
// representative is reduced every step so entries stay bounded, and
// renormalized every renorm_cadence steps to kill constraint drift.
struct OrbitCursor {
    QuotientPoint current;
    long m = 0;
    int renorm_cadence = 1024;
    GroupElement step;  // g_1, cached

    void advance() {
        current.rep = current.rep.model.model == Model::SOn1
                          ? compose(current.rep, step)
                          : mul_sl2(current.rep, step);
        ++m;
        if (renorm_cadence > 0 && m % renorm_cadence == 0)
            current.rep = renormalize(current.rep);
        current = reduce(current.rep, *current.lat);
    }
};

OrbitCursor make_cursor(const QuotientPoint& start, const FlowSpec& spec,
                        int renorm_cadence = 1024);

// H^+_m: the m^d elements with indices in {1..m}^d, lexicographic.
std::vector<GroupElement> forward_ball(const FlowSpec& spec, long m);

// Streaming traversal of H^+_m reusing partial products along the last axis:
// O(m^d) group operations.  fn receives each element once.
void for_each_forward(const FlowSpec& spec, long m,
                      const std::function<void(const GroupElement&)>& fn);

}  // namespace stf
