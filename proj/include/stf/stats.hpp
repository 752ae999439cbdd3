#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "stf/flows.hpp"
#include "stf/targets.hpp"

namespace stf {

// Dyadic grid: powers of two in [lo, hi], with hi appended when it is not
// itself a power of two.
std::vector<long> dyadic_grid(long lo, long hi);

// Run fn(sample_id) for sample_id in [0, samples) over a worker pool.  Each
// call owns its RNG stream, so results are independent of the worker count;
// callers aggregate per-sample records afterwards in index order.
void parallel_samples(long samples, int workers, const std::function<void(long)>& fn);

inline constexpr double tau_unhit = std::numeric_limits<double>::infinity();

// Per-orbit shrinking-target record on an increasing m-grid.
struct HitRecord {
    long sample_id = 0;
    std::vector<long> m_grid;
    std::vector<long> hit_count_diag;    // #{m <= M : x g_m in B_m}
    std::vector<long> hit_count_frozen;  // #{k <= m : x g_k in B_m}
    std::vector<double> d_ball;          // running min d(x g_j, x0)
    std::vector<double> d_cusp;          // running max d(x g_j, x0)
    std::vector<double> tau_r_grid;      // thresholds, largest target first
    std::vector<double> tau;             // first hitting times (tau_unhit if never)
};

// Running penetration extrema d_m(x, x0) = min_{j<=m} d(x g_j, x0) and
// d_m(x, infinity) = max_{j<=m} d(x g_j, x0), sampled on the grid.
HitRecord penetration_depths(const QuotientPoint& x, const FlowSpec& spec,
                             std::span<const long> m_grid, const QuotientPoint& x0);

// Both hit counts of the record in one orbit pass: the diagonal count walks
// the grid directly; the frozen count replays the stored hit times into the
// largest target (nesting makes them a superset of every later target's).
HitRecord hit_counts(const QuotientPoint& x, const FlowSpec& spec, const TargetFamily& fam,
                     std::span<const long> m_grid);

// First hitting times over a threshold grid in one orbit pass.  For balls the
// threshold is the radius around fam's center; for cusp families it is the
// log-height depth.  Unhit thresholds get the tau_unhit sentinel, never a
// silent truncation.
std::vector<double> hitting_times(const QuotientPoint& x, const FlowSpec& spec,
                                  const TargetFamily& fam, std::span<const double> r_grid,
                                  long horizon);

// Forward-ball average (1/m^d) sum_{h in H^+_m} f(xh).
double beta_plus(const std::function<double(const QuotientPoint&)>& f, const QuotientPoint& x,
                 const FlowSpec& spec, long m);

// --- logarithm-law experiment --------------------------------------------

struct LoglawSample {
    long sample_id = 0;
    bool exact_hit = false;  // x0 lay on the orbit; ball stats use the punctured orbit
    std::vector<double> cusp_ratio;  // d_m(x,inf)/ln m on the trend grid
    std::vector<double> ball_ratio;  // -ln d_m(x,x0)/ln m on the trend grid
    long cusp_exceed_count = 0;      // #{m <= t : d(x g_m, x0) >= c ln(t)/(n-1)}
    long ball_close_count = 0;       // #{m <= t : d(x g_m, x0) <  t^{-c/n}}
};

struct LoglawResult {
    std::vector<long> m_grid;  // dyadic trend grid ending at m_max
    std::vector<LoglawSample> rows;
    std::vector<double> median_cusp;  // per grid point
    std::vector<double> median_ball;
};

LoglawResult loglaw_experiment(const Lattice& lat, const FlowSpec& spec, long samples,
                               long m_max, std::uint64_t seed, int workers = 1,
                               double count_exponent = 0.5);

// --- mean-ergodic experiment ---------------------------------------------

struct MetEstimate {
    std::vector<long> m_grid;
    double mu_f = 0;
    std::vector<double> norms;     // ||beta^+_m f - mu(f)||_2 over Haar samples
    std::vector<double> norm_se;
    std::vector<double> atypical_fraction;  // |beta^+_m f - mu| >= mu/2
    std::vector<double> empty_fraction;     // x H^+_m misses the target entirely
    bool kappa_defined = false;
    double kappa = 0;  // -slope of log norm vs log m
    double kappa_se = 0;
};

// f is the fam's indicator frozen at f_index; mu(f) must be exactly known
// and positive.
MetEstimate met_experiment(const TargetFamily& fam, long f_index, const FlowSpec& spec,
                           std::span<const long> m_grid, long samples, std::uint64_t seed,
                           int workers = 1);

// --- eventually-always-hitting experiment --------------------------------

struct AhResult {
    long samples = 0;
    long always_hitters = 0;
    double fraction = 0;
    std::vector<long> levels;             // dyadic checkpoints 2^j
    std::vector<long> level_miss_counts;  // samples whose H^+_{2^{j-1}} missed B_{2^j}
};

// Fraction of Haar samples whose forward ball hits every target over
// [M_lo, M_hi], certified on the dyadic refinement: H^+_{2^{j-1}} meeting
// B_{2^j} covers every m in (2^{j-1}, 2^j] by nesting.
AhResult always_hitting_experiment(const TargetFamily& fam, const FlowSpec& spec, long samples,
                                   long M_lo, long M_hi, std::uint64_t seed, int workers = 1);

// --- quasi-independence experiment ---------------------------------------

struct QiEstimate {
    long M = 0, N = 0;
    long samples = 0;
    double sum_abs_R = 0;  // sum over ordered pairs in the window of |R_hat|
    double sum_mu = 0;     // sum of mu(f_m) over the window
    double ratio = 0;      // the constant-C diagnostic sum|R|/sum mu
    std::vector<double> row_abs_sums;
    std::vector<double> R;  // full matrix, row-major, only when the window is small
    long schmidt_m = 0;
    double E_schmidt = 0;            // sum of mu(f_m), m <= schmidt_m
    std::vector<double> schmidt;     // per-sample |S - E| / (sqrt(E) log^2 E)
    std::vector<long> diag_counts;   // per-sample S at schmidt_m
};

// Correlation sums R_{m,m'} = mu(f_m f_{m'}) - mu(f_m) mu(f_{m'}) over the
// window [M, N], Monte Carlo over Haar samples; mu comes from the schedule.
// Row sums and the pair total are accumulated streaming (the matrix is only
// materialized for windows of width <= 512).  schmidt_m > 0 additionally
// records the per-sample counting discrepancy at that horizon.
QiEstimate qi_experiment(const TargetFamily& fam, const FlowSpec& spec, long M, long N,
                         long samples, std::uint64_t seed, int workers = 1, long schmidt_m = 0);

// --- spectral input data ---------------------------------------------------

// Exceptional (complementary-series) exponents of the lattice.  Empty for
// both built-in lattices; users may inject hypothetical values to observe the
// predicted degradation of the mean-ergodic exponent.
struct SpectralConfig {
    ModelParams model;
    std::vector<double> exceptional_exponents;  // each in (0, rho)
    double alpha = 0;                           // decay constant; 0 = use delta()

    double delta() const;  // rho - max exponent (rho when empty)
    double effective_alpha() const { return alpha > 0 ? alpha : delta(); }
    void check() const;  // throws std::invalid_argument on out-of-range exponents

    static SpectralConfig defaults(ModelParams mp) { return SpectralConfig{mp, {}, 0}; }
};

// Exponent the mean-ergodic theorems predict for the fitted kappa: 1/2 for
// diagonalizable flows, min(d/2, delta) per unit of log m for rank-d
// unipotent flows.
double predicted_kappa(const SpectralConfig& sc, const FlowSpec& spec);

}  // namespace stf
