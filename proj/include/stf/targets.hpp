#pragma once

#include <functional>
#include <vector>

#include "stf/lattice.hpp"
#include "stf/rng.hpp"

namespace stf {

// Hyperbolic ball volume in the covolume's normalization (n = 2 or 3).
double ball_volume(double r, int n);
// Inverse: radius of the ball with the given volume.
double ball_radius(double volume, int n);

// Shrinking family {B_m}: balls around a fixed center, cusp neighborhoods
// {y >= Y(m)}, or a custom membership predicate.
struct TargetFamily {
    enum class Kind { Ball, CuspHeight, Custom };
    Kind kind = Kind::Ball;
    const Lattice* lat = nullptr;
    bool spherical = true;

    QuotientPoint center;                    // Ball
    std::vector<BasePoint> center_translates;  // cached for membership loops
    double embed_radius = 0;                   // exact-measure threshold
    std::function<double(long)> radius;        // Ball: r(m)
    std::function<double(long)> height;        // CuspHeight: Y(m)

    std::function<bool(const QuotientPoint&, long)> custom_member;
    std::function<double(long)> custom_measure;  // empty -> Monte Carlo only

    static TargetFamily ball(const QuotientPoint& center, std::function<double(long)> r);
    // ball whose schedule is given by measure rather than radius
    static TargetFamily ball_with_measure(const QuotientPoint& center,
                                          std::function<double(long)> mu);
    static TargetFamily cusp(const Lattice& lat, std::function<double(long)> Y);
    // cusp neighborhood with measure schedule mu(m)
    static TargetFamily cusp_with_measure(const Lattice& lat, std::function<double(long)> mu);
    static TargetFamily custom(const Lattice& lat,
                               std::function<bool(const QuotientPoint&, long)> member,
                               std::function<double(long)> measure_schedule = {});
};

bool membership(const TargetFamily& fam, const QuotientPoint& p, long m);

// Exact measure; throws config_error when only Monte Carlo estimation applies
// (ball radius above the embedding threshold, or custom without a schedule).
double measure(const TargetFamily& fam, long m);
bool has_exact_measure(const TargetFamily& fam, long m);

// The log-law radius schedules: balls r(m) = m^{-(1+eps)/n}, cusp heights
// ln Y(m) = (1+eps) ln(m)/(n-1).  eps in (-1, 1).
TargetFamily schedule_loglaw_ball(const QuotientPoint& center, double eps);
TargetFamily schedule_loglaw_cusp(const Lattice& lat, double eps);

// a generic interior center with a comfortable embedding radius
QuotientPoint default_ball_center(const Lattice& lat);

// i.i.d. Haar samples of the quotient by rejection from the Iwasawa density,
// with a uniform K-frame attached.
class HaarSampler {
  public:
    HaarSampler(const Lattice& lat, std::uint64_t master_seed, std::uint64_t stream = 0);

    QuotientPoint sample();
    std::vector<QuotientPoint> sample_many(long count);

    long proposals() const { return proposals_; }
    long accepts() const { return accepts_; }

    const Lattice& lattice() const { return *lat_; }

  private:
    const Lattice* lat_;
    Rng rng_;
    long proposals_ = 0, accepts_ = 0;
};

// Monte Carlo measure estimate with standard error.
double measure_mc(const TargetFamily& fam, long m, HaarSampler& sampler, long samples,
                  double* std_err = nullptr);

}  // namespace stf
