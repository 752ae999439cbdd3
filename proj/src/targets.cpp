#include "stf/targets.hpp"

#include <cmath>

namespace stf {

double ball_volume(double r, int n) {
    if (r <= 0) return 0;
    if (n == 2) {
        double s = std::sinh(0.5 * r);
        return 4.0 * M_PI * s * s;
    }
    if (n == 3) return M_PI * (std::sinh(2.0 * r) - 2.0 * r);
    throw std::invalid_argument("ball_volume: n must be 2 or 3");
}

double ball_radius(double volume, int n) {
    if (volume <= 0) return 0;
    if (n == 2) return 2.0 * std::asinh(std::sqrt(volume / (4.0 * M_PI)));
    if (n != 3) throw std::invalid_argument("ball_radius: n must be 2 or 3");
    // Newton on pi(sinh 2r - 2r) = volume, from the small-r cube root
    double r = 0.5 * std::cbrt(6.0 * volume / M_PI);
    for (int i = 0; i < 60; ++i) {
        double f = M_PI * (std::sinh(2.0 * r) - 2.0 * r) - volume;
        double df = 2.0 * M_PI * (std::cosh(2.0 * r) - 1.0);
        double step = f / df;
        r -= step;
        if (std::fabs(step) < 1e-14 * (1.0 + r)) break;
    }
    return r;
}

TargetFamily TargetFamily::ball(const QuotientPoint& center, std::function<double(long)> r) {
    TargetFamily f;
    f.kind = Kind::Ball;
    f.lat = center.lat;
    f.center = center;
    f.center_translates = translates_of(center, 2);
    f.embed_radius = embedding_radius(center, 3);
    f.radius = std::move(r);
    return f;
}

TargetFamily TargetFamily::ball_with_measure(const QuotientPoint& center,
                                             std::function<double(long)> mu) {
    const Lattice* lat = center.lat;
    double covol = lat->covolume();
    int n = lat->model.n;
    TargetFamily f = ball(center, {});
    f.radius = [mu = std::move(mu), covol, n](long m) {
        return ball_radius(mu(m) * covol, n);
    };
    return f;
}

TargetFamily TargetFamily::cusp(const Lattice& lat, std::function<double(long)> Y) {
    TargetFamily f;
    f.kind = Kind::CuspHeight;
    f.lat = &lat;
    f.height = std::move(Y);
    return f;
}

TargetFamily TargetFamily::cusp_with_measure(const Lattice& lat, std::function<double(long)> mu) {
    double covol = lat.covolume();
    int n = lat.model.n;
    // strip measure above Y: modular 1/(Y covol); Picard 1/(4 Y^2 covol)
    return cusp(lat, [mu = std::move(mu), covol, n](long m) {
        double target = mu(m) * covol;
        return n == 2 ? 1.0 / target : std::sqrt(1.0 / (4.0 * target));
    });
}

TargetFamily TargetFamily::custom(const Lattice& lat,
                                  std::function<bool(const QuotientPoint&, long)> member,
                                  std::function<double(long)> measure_schedule) {
    TargetFamily f;
    f.kind = Kind::Custom;
    f.lat = &lat;
    f.spherical = false;
    f.custom_member = std::move(member);
    f.custom_measure = std::move(measure_schedule);
    return f;
}

bool membership(const TargetFamily& fam, const QuotientPoint& p, long m) {
    switch (fam.kind) {
        case TargetFamily::Kind::Ball:
            return min_cosh_dist(p.base, fam.center_translates) < std::cosh(fam.radius(m));
        case TargetFamily::Kind::CuspHeight:
            return p.base.y >= fam.height(m);
        case TargetFamily::Kind::Custom:
            return fam.custom_member(p, m);
    }
    return false;
}

bool has_exact_measure(const TargetFamily& fam, long m) {
    switch (fam.kind) {
        case TargetFamily::Kind::Ball:
            return fam.radius(m) <= fam.embed_radius;
        case TargetFamily::Kind::CuspHeight:
            return fam.height(m) >= 1.0;
        case TargetFamily::Kind::Custom:
            return static_cast<bool>(fam.custom_measure);
    }
    return false;
}

double measure(const TargetFamily& fam, long m) {
    double covol = fam.lat->covolume();
    int n = fam.lat->model.n;
    switch (fam.kind) {
        case TargetFamily::Kind::Ball: {
            double r = fam.radius(m);
            if (r <= 0) return 0;
            if (r > fam.embed_radius)
                throw config_error(
                    "ball radius exceeds the center's embedding radius; "
                    "use the Monte Carlo estimator");
            return ball_volume(r, n) / covol;
        }
        case TargetFamily::Kind::CuspHeight: {
            double y = fam.height(m);
            if (y < 1.0)
                throw config_error("cusp measure is exact only for heights Y >= 1");
            return (n == 2 ? 1.0 / y : 1.0 / (4.0 * y * y)) / covol;
        }
        case TargetFamily::Kind::Custom:
            if (!fam.custom_measure)
                throw config_error("custom target has no measure schedule; "
                                   "use the Monte Carlo estimator");
            return fam.custom_measure(m);
    }
    return 0;
}

TargetFamily schedule_loglaw_ball(const QuotientPoint& center, double eps) {
    if (!(eps > -1.0 && eps < 1.0))
        throw std::invalid_argument("log-law schedule needs |eps| < 1");
    int n = center.lat->model.n;
    return TargetFamily::ball(center, [eps, n](long m) {
        return std::pow(static_cast<double>(m), -(1.0 + eps) / n);
    });
}

TargetFamily schedule_loglaw_cusp(const Lattice& lat, double eps) {
    if (!(eps > -1.0 && eps < 1.0))
        throw std::invalid_argument("log-law schedule needs |eps| < 1");
    int n = lat.model.n;
    return TargetFamily::cusp(lat, [eps, n](long m) {
        return std::exp((1.0 + eps) * std::log(static_cast<double>(m)) / (n - 1));
    });
}

QuotientPoint default_ball_center(const Lattice& lat) {
    // generic interior points well away from the elliptic fixed points
    std::vector<double> x = lat.model.n == 2 ? std::vector<double>{0.08}
                                             : std::vector<double>{0.1, 0.15};
    double y = lat.model.n == 2 ? 1.22 : 1.25;
    return reduce(compose(make_unipotent(x, lat.model), make_diag(std::log(y), lat.model)), lat);
}

HaarSampler::HaarSampler(const Lattice& lat, std::uint64_t master_seed, std::uint64_t stream)
    : lat_(&lat), rng_(master_seed, stream) {}

QuotientPoint HaarSampler::sample() {
    const int n = lat_->model.n;
    const double yf = lat_->y_floor();
    for (;;) {
        if (proposals_ > 200 && accepts_ * 100 < proposals_)
            throw config_error("Haar rejection sampler acceptance rate below 1%");
        ++proposals_;
        double x1 = rng_.uniform(-0.5, 0.5);
        double x2 = n == 3 ? rng_.uniform(0.0, 0.5) : 0.0;
        // height from the density y^{-n} on [y_floor, inf)
        double u = rng_.uniform_pos();
        double y = n == 2 ? yf / u : yf / std::sqrt(u);
        if (x1 * x1 + x2 * x2 + y * y < 1.0) continue;
        ++accepts_;

        // attach a uniform K-frame; the point is already reduced
        GroupElement k = GroupElement::identity(lat_->model);
        if (n == 2) {
            double th = rng_.uniform(0, 2.0 * M_PI);
            k.m2 = {cplx(std::cos(th)), cplx(-std::sin(th)), cplx(std::sin(th)),
                    cplx(std::cos(th))};
        } else {
            double q0 = rng_.normal(), q1 = rng_.normal(), q2 = rng_.normal(), q3 = rng_.normal();
            double nq = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
            k.m2 = {cplx(q0 / nq, q1 / nq), cplx(q2 / nq, q3 / nq), cplx(-q2 / nq, q3 / nq),
                    cplx(q0 / nq, -q1 / nq)};
        }
        std::vector<double> x = n == 2 ? std::vector<double>{x1} : std::vector<double>{x1, x2};
        QuotientPoint p;
        p.lat = lat_;
        p.rep = compose(make_unipotent(x, lat_->model),
                        compose(make_diag(std::log(y), lat_->model), k));
        p.base = BasePoint{x1, x2, y};
        return p;
    }
}

std::vector<QuotientPoint> HaarSampler::sample_many(long count) {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    std::vector<QuotientPoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) out.push_back(sample());
    return out;
}

double measure_mc(const TargetFamily& fam, long m, HaarSampler& sampler, long samples,
                  double* std_err) {
    long hits = 0;
    for (long i = 0; i < samples; ++i)
        if (membership(fam, sampler.sample(), m)) ++hits;
    double p = static_cast<double>(hits) / static_cast<double>(samples);
    if (std_err) *std_err = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return p;
}

}  // namespace stf
