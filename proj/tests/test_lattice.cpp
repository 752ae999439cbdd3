#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stf/lattice.hpp"
#include "test_util.hpp"

using namespace stf;
using testutil::random_g;

namespace {

// point z = x + iy (n=2) or z + yj (n=3) as a reduced quotient point, built
// from the n_x a_t section
QuotientPoint point_at(const Lattice& lat, double x1, double x2, double y) {
    std::vector<double> x = lat.model.n == 2 ? std::vector<double>{x1}
                                             : std::vector<double>{x1, x2};
    GroupElement g = compose(make_unipotent(x, lat.model), make_diag(std::log(y), lat.model));
    return reduce(g, lat);
}

GroupElement random_word(const Lattice& lat, Rng& rng, int len) {
    GroupElement w = GroupElement::identity(lat.model);
    const auto& gens = lat.generators();
    for (int i = 0; i < len; ++i) w = compose(w, gens[rng.next_u64() % gens.size()]);
    return w;
}

}  // namespace

TEST_CASE("covolumes match the classical values") {
    // modular: pi/3; Picard: Catalan/3 (Humbert's formula)
    CHECK(Lattice::modular().covolume() == doctest::Approx(M_PI / 3.0).epsilon(1e-10));
    CHECK(Lattice::picard().covolume() ==
          doctest::Approx(0.915965594177219 / 3.0).epsilon(1e-10));
}

TEST_CASE("mobius action basics") {
    ModelParams mp = ModelParams::sl2r();
    BasePoint i2 = mobius(make_diag(std::log(2.0), mp), BasePoint{0, 0, 1});
    CHECK(i2.y == doctest::Approx(2.0));
    GroupElement s = GroupElement::identity(mp);
    s.m2 = {cplx(0), cplx(-1), cplx(1), cplx(0)};
    BasePoint q = mobius(s, BasePoint{0.3, 0, 0.4});  // -1/z for z = 0.3+0.4i
    CHECK(q.x1 == doctest::Approx(-1.2));
    CHECK(q.y == doctest::Approx(1.6));

    // n=3: inversion of j is j
    GroupElement sc = GroupElement::identity(ModelParams::sl2c());
    sc.m2 = {cplx(0), cplx(-1), cplx(1), cplx(0)};
    BasePoint j = mobius(sc, BasePoint{0, 0, 1});
    CHECK(std::fabs(j.x1) < 1e-15);
    CHECK(std::fabs(j.x2) < 1e-15);
    CHECK(j.y == doctest::Approx(1.0));
}

TEST_CASE("reduce on the modular surface") {
    const Lattice& lat = Lattice::modular();

    QuotientPoint p = point_at(lat, 0.25, 0, 10);
    CHECK(p.base.x1 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.base.y == doctest::Approx(10.0).epsilon(1e-12));

    p = point_at(lat, 5, 0, 1);
    CHECK(std::fabs(p.base.x1) < 1e-12);
    CHECK(p.base.y == doctest::Approx(1.0).epsilon(1e-12));

    p = point_at(lat, 0.3, 0, 0.4);
    CHECK(p.base.x1 == doctest::Approx(-0.2).epsilon(1e-10));
    CHECK(p.base.y == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(lat.in_domain(p.base));

    // brute-force cross-check: some word of length <= 4 lands in the domain
    // at the same point
    bool found = false;
    for (const GroupElement& w : lat.word_ball(4)) {
        BasePoint b = mobius(w, BasePoint{0.3, 0, 0.4});
        if (lat.in_domain(b) && std::fabs(b.x1 + 0.2) < 1e-9 && std::fabs(b.y - 1.6) < 1e-9)
            found = true;
    }
    CHECK(found);
}

TEST_CASE("reduce on the Picard quotient") {
    const Lattice& lat = Lattice::picard();
    QuotientPoint p = point_at(lat, 0.25, 0.1, 5);
    CHECK(p.base.x1 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.base.x2 == doctest::Approx(0.1).epsilon(1e-12));

    // negative x2 folds via the unit i
    p = point_at(lat, 0.25, -0.1, 5);
    CHECK(p.base.x1 == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(p.base.x2 == doctest::Approx(0.1).epsilon(1e-12));

    Rng rng(41, 0);
    for (int i = 0; i < 200; ++i) {
        QuotientPoint q = reduce(random_g(lat.model, rng), lat);
        CHECK(lat.in_domain(q.base));
        CHECK(std::fabs(defect(q.rep)) < 1e-9);
    }
}

TEST_CASE("reduce is lattice invariant") {
    Rng rng(43, 0);
    for (const Lattice* lat : {&Lattice::modular(), &Lattice::picard()})
        for (int i = 0; i < 100; ++i) {
            GroupElement g = random_g(lat->model, rng);
            GroupElement w = random_word(*lat, rng, static_cast<int>(rng.next_u64() % 7));
            BasePoint a = reduce(g, *lat).base;
            BasePoint b = reduce(compose(w, g), *lat).base;
            CHECK(hyp_dist(a, b) < 1e-8);
        }
}

TEST_CASE("right flow compatibility") {
    Rng rng(47, 0);
    for (const Lattice* lat : {&Lattice::modular(), &Lattice::picard()})
        for (int i = 0; i < 100; ++i) {
            GroupElement g = random_g(lat->model, rng);
            GroupElement h = random_g(lat->model, rng);
            BasePoint a = reduce(compose(reduce(g, *lat).rep, h), *lat).base;
            BasePoint b = reduce(compose(g, h), *lat).base;
            CHECK(hyp_dist(a, b) < 1e-8);
        }
}

TEST_CASE("quotient distance") {
    const Lattice& lat = Lattice::modular();
    QuotientPoint pi = point_at(lat, 0, 0, 1);
    QuotientPoint p2i = point_at(lat, 0, 0, 2);
    CHECK(quotient_distance(pi, pi) == doctest::Approx(0.0));
    CHECK(quotient_distance(pi, p2i) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    // same orbit: z and z+1
    QuotientPoint a = point_at(lat, 0.2, 0, 1.3);
    QuotientPoint b = point_at(lat, 1.2, 0, 1.3);
    CHECK(quotient_distance(a, b) < 1e-10);
}

TEST_CASE("quotient distance is a pseudometric on samples") {
    Rng rng(53, 0);
    for (const Lattice* lat : {&Lattice::modular(), &Lattice::picard()}) {
        std::vector<QuotientPoint> pts;
        for (int i = 0; i < 30; ++i) pts.push_back(reduce(random_g(lat->model, rng, 1.5), *lat));
        for (int i = 0; i < 200; ++i) {
            const QuotientPoint& p = pts[rng.next_u64() % pts.size()];
            const QuotientPoint& q = pts[rng.next_u64() % pts.size()];
            const QuotientPoint& r = pts[rng.next_u64() % pts.size()];
            double dpq = quotient_distance(p, q);
            CHECK(std::fabs(dpq - quotient_distance(q, p)) < 1e-10);
            CHECK(dpq <= quotient_distance(p, r) + quotient_distance(r, q) + 1e-8);
        }
    }
}

TEST_CASE("cusp height") {
    const Lattice& lat = Lattice::modular();
    CHECK(cusp_height(point_at(lat, 0, 0, 1)) == doctest::Approx(0.0));
    CHECK(cusp_height(point_at(lat, 0.25, 0, std::exp(3.0))) == doctest::Approx(3.0));

    // high in the cusp, height tracks distance to the base point within O(1)
    QuotientPoint base = point_at(lat, 0, 0, 1);
    Rng rng(59, 0);
    for (int i = 0; i < 1000; ++i) {
        QuotientPoint p = point_at(lat, rng.uniform(-0.5, 0.5), 0,
                                   std::exp(rng.uniform(2.0, 6.0)));
        CHECK(std::fabs(cusp_height(p) - quotient_distance(p, base)) <= 1.0);
    }
}

TEST_CASE("embedding radius") {
    const Lattice& lat = Lattice::modular();
    // generic interior center embeds a radius-0.1 ball
    QuotientPoint c = point_at(lat, 0.08, 0, 1.22);
    double r = embedding_radius(c);
    CHECK(r > 0.1);
    // the orbifold point i is fixed by the inversion: radius collapses
    CHECK(embedding_radius(point_at(lat, 0, 0, 1)) < 1e-6);

    const Lattice& pic = Lattice::picard();
    QuotientPoint c3 = reduce(compose(make_unipotent({0.1, 0.15}, pic.model),
                                      make_diag(std::log(1.25), pic.model)),
                              pic);
    CHECK(embedding_radius(c3) > 0.1);
}

TEST_CASE("word log records the reduction moves") {
    const Lattice& lat = Lattice::modular();
    QuotientPoint p = reduce(compose(make_unipotent({5}, lat.model),
                                     make_diag(std::log(2.0), lat.model)),
                             lat, true);
    CHECK(p.word_log.size() == 1);  // single translation
    CHECK(p.word_log[0] == 0);
    QuotientPoint q = reduce(GroupElement::identity(lat.model), lat, true);
    CHECK(q.word_log.empty());
}
