#include "stf/flows.hpp"

namespace stf {

FlowSpec FlowSpec::diagonalizable(double c, ModelParams mp) {
    return diagonalizable(c, GroupElement::identity(mp));
}

FlowSpec FlowSpec::diagonalizable(double c, const GroupElement& conjugator) {
    if (!(c > 0)) throw std::invalid_argument("diagonalizable flow needs c > 0");
    FlowSpec s;
    s.kind = Kind::Diagonalizable;
    s.model = conjugator.model;
    s.c = c;
    s.conjugator = conjugator;
    return s;
}

FlowSpec FlowSpec::unipotent(int rank, ModelParams mp) {
    std::vector<std::vector<double>> basis;
    for (int i = 0; i < rank; ++i) {
        std::vector<double> b(static_cast<std::size_t>(mp.n) - 1, 0.0);
        if (i >= mp.n - 1) throw std::invalid_argument("unipotent rank must be <= n-1");
        b[static_cast<std::size_t>(i)] = 1.0;
        basis.push_back(std::move(b));
    }
    return unipotent(basis, mp);
}

FlowSpec FlowSpec::unipotent(const std::vector<std::vector<double>>& basis, ModelParams mp) {
    if (basis.empty() || static_cast<int>(basis.size()) > mp.n - 1)
        throw std::invalid_argument("unipotent rank must be between 1 and n-1");
    for (const auto& b : basis)
        if (static_cast<int>(b.size()) != mp.n - 1)
            throw std::invalid_argument("unipotent basis vectors must lie in R^{n-1}");
    // crude independence check via Gram determinant sign
    if (basis.size() == 2) {
        double g00 = 0, g01 = 0, g11 = 0;
        for (std::size_t i = 0; i < basis[0].size(); ++i) {
            g00 += basis[0][i] * basis[0][i];
            g01 += basis[0][i] * basis[1][i];
            g11 += basis[1][i] * basis[1][i];
        }
        if (g00 * g11 - g01 * g01 < 1e-12)
            throw std::invalid_argument("unipotent basis not linearly independent");
    }
    FlowSpec s;
    s.kind = Kind::Unipotent;
    s.model = mp;
    s.rank = static_cast<int>(basis.size());
    s.basis = basis;
    s.conjugator = GroupElement::identity(mp);
    return s;
}

GroupElement flow_element(const FlowSpec& spec, const std::vector<long>& k) {
    if (spec.kind == FlowSpec::Kind::Diagonalizable) {
        if (k.size() != 1) throw std::invalid_argument("diagonalizable flow has rank 1");
        GroupElement a = make_diag(spec.c * static_cast<double>(k[0]), spec.model);
        return compose(inverse(spec.conjugator), compose(a, spec.conjugator));
    }
    if (static_cast<int>(k.size()) != spec.rank)
        throw std::invalid_argument("index rank mismatch");
    std::vector<double> x(static_cast<std::size_t>(spec.model.n) - 1, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] += static_cast<double>(k[i]) * spec.basis[i][j];
    return make_unipotent(x, spec.model);
}

GroupElement flow_element(const FlowSpec& spec, long k) { return flow_element(spec, std::vector<long>{k}); }

OrbitCursor make_cursor(const QuotientPoint& start, const FlowSpec& spec, int renorm_cadence) {
    if (spec.kind == FlowSpec::Kind::Unipotent && spec.rank > 1)
        throw std::invalid_argument("sequential cursors are rank-1; use for_each_forward");
    OrbitCursor c;
    c.current = start;
    c.renorm_cadence = renorm_cadence;
    c.step = flow_element(spec, 1);
    return c;
}

void for_each_forward(const FlowSpec& spec, long m,
                      const std::function<void(const GroupElement&)>& fn) {
    if (m < 1) throw std::invalid_argument("forward ball needs m >= 1");
    if (spec.kind == FlowSpec::Kind::Diagonalizable || spec.rank == 1) {
        GroupElement g1 = flow_element(spec, 1);
        GroupElement acc = g1;
        for (long i = 1; i <= m; ++i) {
            fn(acc);
            if (i < m) acc = compose(acc, g1);
        }
        return;
    }
    // rank d >= 2: iterate over the outer indices, running product on the last
    std::vector<long> idx(static_cast<std::size_t>(spec.rank), 1);
    GroupElement last_step =
        flow_element(spec, [&] {
            std::vector<long> e(static_cast<std::size_t>(spec.rank), 0);
            e.back() = 1;
            return e;
        }());
    for (;;) {
        GroupElement row = flow_element(spec, idx);  // idx with last component 1
        for (long j = 1; j <= m; ++j) {
            fn(row);
            if (j < m) row = compose(row, last_step);
        }
        // odometer over the first rank-1 components
        int pos = spec.rank - 2;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m) {
            idx[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
}

std::vector<GroupElement> forward_ball(const FlowSpec& spec, long m) {
    std::vector<GroupElement> out;
    for_each_forward(spec, m, [&](const GroupElement& g) { out.push_back(g); });
    return out;
}

}  // namespace stf
