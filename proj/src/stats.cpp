#include "stf/stats.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace stf {

std::vector<long> dyadic_grid(long lo, long hi) {
    if (lo < 1 || hi < lo) throw std::invalid_argument("dyadic_grid needs 1 <= lo <= hi");
    std::vector<long> g;
    long p = 1;
    while (p < lo) p *= 2;
    for (; p <= hi; p *= 2) g.push_back(p);
    if (g.empty() || g.back() != hi) g.push_back(hi);
    return g;
}

void parallel_samples(long samples, int workers, const std::function<void(long)>& fn) {
    if (workers <= 1) {
        for (long i = 0; i < samples; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= samples) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!first_err) first_err = std::current_exception();
                    next.store(samples);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_err) std::rethrow_exception(first_err);
}

namespace {

void check_grid(std::span<const long> m_grid) {
    if (m_grid.empty()) throw std::invalid_argument("empty m-grid");
    for (std::size_t i = 0; i < m_grid.size(); ++i)
        if (m_grid[i] < 1 || (i > 0 && m_grid[i] <= m_grid[i - 1]))
            throw std::invalid_argument("m-grid must be positive and increasing");
}

}  // namespace

HitRecord penetration_depths(const QuotientPoint& x, const FlowSpec& spec,
                             std::span<const long> m_grid, const QuotientPoint& x0) {
    check_grid(m_grid);
    HitRecord rec;
    rec.m_grid.assign(m_grid.begin(), m_grid.end());
    std::vector<BasePoint> trans = translates_of(x0, 2);
    OrbitCursor cur = make_cursor(x, spec);
    double best_cosh = 1e300, max_height = -1e300;
    std::size_t gi = 0;
    for (long m = 1; m <= m_grid.back(); ++m) {
        cur.advance();
        best_cosh = std::min(best_cosh, min_cosh_dist(cur.current.base, trans));
        max_height = std::max(max_height, cusp_height(cur.current));
        if (m == m_grid[gi]) {
            rec.d_ball.push_back(acosh_clamped(best_cosh));
            rec.d_cusp.push_back(max_height);
            ++gi;
        }
    }
    return rec;
}

HitRecord hit_counts(const QuotientPoint& x, const FlowSpec& spec, const TargetFamily& fam,
                     std::span<const long> m_grid) {
    check_grid(m_grid);
    HitRecord rec;
    rec.m_grid.assign(m_grid.begin(), m_grid.end());
    // hit times into the largest target; nesting makes these a superset of
    // the hits into every later B_m, so the frozen counts replay this list
    std::vector<std::pair<long, QuotientPoint>> hits;
    OrbitCursor cur = make_cursor(x, spec);
    long diag = 0;
    std::size_t gi = 0;
    for (long m = 1; m <= m_grid.back(); ++m) {
        cur.advance();
        if (membership(fam, cur.current, m)) ++diag;
        if (membership(fam, cur.current, m_grid.front())) hits.emplace_back(m, cur.current);
        if (m == m_grid[gi]) {
            rec.hit_count_diag.push_back(diag);
            long frozen = 0;
            for (const auto& [k, p] : hits)
                if (k <= m && membership(fam, p, m)) ++frozen;
            rec.hit_count_frozen.push_back(frozen);
            ++gi;
        }
    }
    return rec;
}

std::vector<double> hitting_times(const QuotientPoint& x, const FlowSpec& spec,
                                  const TargetFamily& fam, std::span<const double> r_grid,
                                  long horizon) {
    if (fam.kind == TargetFamily::Kind::Custom)
        throw std::invalid_argument("hitting_times needs a ball or cusp family");
    bool ball = fam.kind == TargetFamily::Kind::Ball;
    // visit thresholds easiest target first: large radii / shallow depths
    std::vector<std::size_t> order(r_grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ball ? r_grid[a] > r_grid[b] : r_grid[a] < r_grid[b];
    });
    std::vector<double> tau(r_grid.size(), tau_unhit);
    OrbitCursor cur = make_cursor(x, spec);
    double best = ball ? 1e300 : -1e300;  // min cosh-dist / max log-height
    std::size_t idx = 0;
    for (long m = 1; m <= horizon && idx < order.size(); ++m) {
        cur.advance();
        if (ball)
            best = std::min(best, min_cosh_dist(cur.current.base, fam.center_translates));
        else
            best = std::max(best, cusp_height(cur.current));
        while (idx < order.size()) {
            double r = r_grid[order[idx]];
            bool hit = ball ? best < std::cosh(r) : best >= r;
            if (!hit) break;
            tau[order[idx]] = static_cast<double>(m);
            ++idx;
        }
    }
    return tau;
}

double beta_plus(const std::function<double(const QuotientPoint&)>& f, const QuotientPoint& x,
                 const FlowSpec& spec, long m) {
    if (m < 1) throw std::invalid_argument("beta_plus needs m >= 1");
    double sum = 0;
    if (spec.kind == FlowSpec::Kind::Diagonalizable || spec.rank == 1) {
        OrbitCursor cur = make_cursor(x, spec);
        for (long k = 0; k < m; ++k) {
            cur.advance();
            sum += f(cur.current);
        }
        return sum / static_cast<double>(m);
    }
    const Lattice& lat = *x.lat;
    long count = 0;
    for_each_forward(spec, m, [&](const GroupElement& h) {
        sum += f(reduce(compose(x.rep, h), lat));
        ++count;
    });
    return sum / static_cast<double>(count);
}

// --- log-law experiment ----------------------------------------------------

LoglawResult loglaw_experiment(const Lattice& lat, const FlowSpec& spec, long samples,
                               long m_max, std::uint64_t seed, int workers,
                               double count_exponent) {
    if (samples < 1 || m_max < 2) throw std::invalid_argument("loglaw needs samples and m_max");
    LoglawResult res;
    res.m_grid = dyadic_grid(std::min<long>(8, m_max), m_max);
    res.rows.resize(samples);

    int n = lat.model.n;
    QuotientPoint x0 = reduce(GroupElement::identity(lat.model), lat);
    const std::vector<BasePoint> trans = translates_of(x0, 1);
    double thr_h = count_exponent * std::log(static_cast<double>(m_max)) / (n - 1);
    double cosh_thr_h = std::cosh(thr_h);
    double cosh_thr_ball =
        std::cosh(std::pow(static_cast<double>(m_max), -count_exponent / n));

    parallel_samples(samples, workers, [&](long id) {
        LoglawSample row;
        row.sample_id = id;
        HaarSampler sampler(lat, seed, static_cast<std::uint64_t>(id));
        OrbitCursor cur = make_cursor(sampler.sample(), spec);
        double min_cosh = 1e300, max_h = -1e300;
        std::size_t gi = 0;
        for (long m = 1; m <= m_max; ++m) {
            cur.advance();
            double c = min_cosh_dist(cur.current.base, trans);
            if (c < 1.0 + 1e-24) {
                row.exact_hit = true;  // the reference point lies on the orbit
            } else if (c < min_cosh) {
                min_cosh = c;
            }
            double h = cusp_height(cur.current);
            if (h > max_h) max_h = h;
            if (c >= cosh_thr_h) ++row.cusp_exceed_count;
            if (c < cosh_thr_ball) ++row.ball_close_count;
            if (m == res.m_grid[gi]) {
                double lm = std::log(static_cast<double>(m));
                row.cusp_ratio.push_back(max_h / lm);
                row.ball_ratio.push_back(-std::log(acosh_clamped(min_cosh)) / lm);
                ++gi;
            }
        }
        res.rows[id] = std::move(row);
    });

    for (std::size_t g = 0; g < res.m_grid.size(); ++g) {
        std::vector<double> cs, bs;
        for (const LoglawSample& r : res.rows) {
            cs.push_back(r.cusp_ratio[g]);
            bs.push_back(r.ball_ratio[g]);
        }
        res.median_cusp.push_back(median(cs));
        res.median_ball.push_back(median(bs));
    }
    return res;
}

// --- mean-ergodic experiment -----------------------------------------------

MetEstimate met_experiment(const TargetFamily& fam, long f_index, const FlowSpec& spec,
                           std::span<const long> m_grid, long samples, std::uint64_t seed,
                           int workers) {
    check_grid(m_grid);
    if (samples < 2) throw std::invalid_argument("met_experiment needs samples >= 2");
    MetEstimate est;
    est.m_grid.assign(m_grid.begin(), m_grid.end());
    est.mu_f = measure(fam, f_index);
    if (est.mu_f <= 0) throw std::invalid_argument("met_experiment needs mu(f) > 0");

    const Lattice& lat = *fam.lat;
    std::size_t G = m_grid.size();
    std::vector<std::vector<double>> avg(samples, std::vector<double>(G, 0.0));
    bool sequential = spec.kind == FlowSpec::Kind::Diagonalizable || spec.rank == 1;

    parallel_samples(samples, workers, [&](long id) {
        HaarSampler sampler(lat, seed, static_cast<std::uint64_t>(id));
        QuotientPoint x = sampler.sample();
        if (sequential) {
            OrbitCursor cur = make_cursor(x, spec);
            long cnt = 0;
            std::size_t gi = 0;
            for (long m = 1; m <= m_grid.back(); ++m) {
                cur.advance();
                if (membership(fam, cur.current, f_index)) ++cnt;
                if (m == m_grid[gi]) {
                    avg[id][gi] = static_cast<double>(cnt) / static_cast<double>(m);
                    ++gi;
                }
            }
        } else {
            for (std::size_t gi = 0; gi < G; ++gi) {
                long cnt = 0, total = 0;
                for_each_forward(spec, m_grid[gi], [&](const GroupElement& h) {
                    if (membership(fam, reduce(compose(x.rep, h), lat), f_index)) ++cnt;
                    ++total;
                });
                avg[id][gi] = static_cast<double>(cnt) / static_cast<double>(total);
            }
        }
    });

    std::vector<double> lx, ly;
    bool all_positive = true;
    for (std::size_t gi = 0; gi < G; ++gi) {
        std::vector<double> dev2;
        long atyp = 0, empty = 0;
        for (long id = 0; id < samples; ++id) {
            double d = avg[id][gi] - est.mu_f;
            dev2.push_back(d * d);
            if (std::fabs(d) >= 0.5 * est.mu_f) ++atyp;
            if (avg[id][gi] == 0.0) ++empty;
        }
        double n2 = mean(dev2);
        double norm = std::sqrt(n2);
        est.norms.push_back(norm);
        est.norm_se.push_back(norm > 0 ? std_error(dev2) / (2.0 * norm) : 0.0);
        est.atypical_fraction.push_back(static_cast<double>(atyp) / samples);
        est.empty_fraction.push_back(static_cast<double>(empty) / samples);
        if (norm > 0) {
            lx.push_back(std::log(static_cast<double>(m_grid[gi])));
            ly.push_back(std::log(norm));
        } else {
            all_positive = false;
        }
    }
    if (all_positive && lx.size() >= 2) {
        LineFit f = fit_line(lx, ly);
        est.kappa = -f.slope;
        est.kappa_se = f.slope_se;
        est.kappa_defined = true;
    }
    return est;
}

// --- eventually-always-hitting experiment ----------------------------------

AhResult always_hitting_experiment(const TargetFamily& fam, const FlowSpec& spec, long samples,
                                   long M_lo, long M_hi, std::uint64_t seed, int workers) {
    if (M_lo < 2 || M_hi <= M_lo) throw std::invalid_argument("need 2 <= M_lo < M_hi");
    AhResult res;
    res.samples = samples;
    long p = 2;
    while (p < M_lo) p *= 2;
    for (; p / 2 < M_hi; p *= 2) res.levels.push_back(p);
    res.level_miss_counts.assign(res.levels.size(), 0);

    const Lattice& lat = *fam.lat;
    long walk_to = res.levels.back() / 2;
    long level_lo = res.levels.front();
    std::vector<std::vector<std::uint8_t>> ok(samples);

    parallel_samples(samples, workers, [&](long id) {
        HaarSampler sampler(lat, seed, static_cast<std::uint64_t>(id));
        OrbitCursor cur = make_cursor(sampler.sample(), spec);
        // hits into the largest target in play; later targets are nested in it
        std::vector<std::pair<long, QuotientPoint>> hits;
        for (long m = 1; m <= walk_to; ++m) {
            cur.advance();
            if (membership(fam, cur.current, level_lo)) hits.emplace_back(m, cur.current);
        }
        std::vector<std::uint8_t> row(res.levels.size(), 0);
        for (std::size_t li = 0; li < res.levels.size(); ++li) {
            long level = res.levels[li], horizon = level / 2;
            for (const auto& [k, q] : hits) {
                if (k > horizon) break;
                if (membership(fam, q, level)) {
                    row[li] = 1;
                    break;
                }
            }
        }
        ok[id] = std::move(row);
    });

    for (long id = 0; id < samples; ++id) {
        bool all = true;
        for (std::size_t li = 0; li < res.levels.size(); ++li) {
            if (!ok[id][li]) {
                ++res.level_miss_counts[li];
                all = false;
            }
        }
        if (all) ++res.always_hitters;
    }
    res.fraction = static_cast<double>(res.always_hitters) / static_cast<double>(samples);
    return res;
}

// --- quasi-independence experiment -----------------------------------------

QiEstimate qi_experiment(const TargetFamily& fam, const FlowSpec& spec, long M, long N,
                         long samples, std::uint64_t seed, int workers, long schmidt_m) {
    if (M < 1 || N < M) throw std::invalid_argument("need 1 <= M <= N");
    if (samples < 1) throw std::invalid_argument("need samples >= 1");
    QiEstimate est;
    est.M = M;
    est.N = N;
    est.samples = samples;
    est.schmidt_m = schmidt_m;

    long W = N - M + 1;
    std::vector<double> mu(W);
    for (long w = 0; w < W; ++w) mu[w] = measure(fam, M + w);
    est.sum_mu = std::accumulate(mu.begin(), mu.end(), 0.0);

    const Lattice& lat = *fam.lat;
    long walk_to = std::max(N, schmidt_m);
    std::size_t words = static_cast<std::size_t>((W + 63) / 64);
    std::vector<std::vector<std::uint64_t>> sample_bits(samples);
    if (schmidt_m > 0) est.diag_counts.assign(samples, 0);

    parallel_samples(samples, workers, [&](long id) {
        HaarSampler sampler(lat, seed, static_cast<std::uint64_t>(id));
        OrbitCursor cur = make_cursor(sampler.sample(), spec);
        std::vector<std::uint64_t> bits(words, 0);
        long diag = 0;
        for (long m = 1; m <= walk_to; ++m) {
            cur.advance();
            bool in_window = m >= M && m <= N;
            bool need_diag = schmidt_m > 0 && m <= schmidt_m;
            if (!in_window && !need_diag) continue;
            if (!membership(fam, cur.current, m)) continue;
            if (in_window) {
                long w = m - M;
                bits[static_cast<std::size_t>(w / 64)] |= 1ull << (w % 64);
            }
            if (need_diag) ++diag;
        }
        sample_bits[id] = std::move(bits);
        if (schmidt_m > 0) est.diag_counts[id] = diag;
    });

    // transpose into per-m bitsets over samples for the pair loop
    std::size_t swords = static_cast<std::size_t>((samples + 63) / 64);
    std::vector<std::vector<std::uint64_t>> mbits(W, std::vector<std::uint64_t>(swords, 0));
    for (long id = 0; id < samples; ++id)
        for (long w = 0; w < W; ++w)
            if (sample_bits[id][static_cast<std::size_t>(w / 64)] >> (w % 64) & 1)
                mbits[w][static_cast<std::size_t>(id / 64)] |= 1ull << (id % 64);

    double S = static_cast<double>(samples);
    bool keep_matrix = W <= 512;
    if (keep_matrix) est.R.assign(static_cast<std::size_t>(W) * W, 0.0);
    est.row_abs_sums.assign(W, 0.0);
    for (long a = 0; a < W; ++a)
        for (long b = a; b < W; ++b) {
            long cnt = 0;
            for (std::size_t k = 0; k < swords; ++k)
                cnt += std::popcount(mbits[a][k] & mbits[b][k]);
            double r = static_cast<double>(cnt) / S - mu[a] * mu[b];
            double ar = std::fabs(r);
            est.sum_abs_R += (a == b ? 1.0 : 2.0) * ar;
            est.row_abs_sums[a] += ar;
            if (b != a) est.row_abs_sums[b] += ar;
            if (keep_matrix) {
                est.R[static_cast<std::size_t>(a) * W + b] = r;
                est.R[static_cast<std::size_t>(b) * W + a] = r;
            }
        }
    est.ratio = est.sum_abs_R / est.sum_mu;

    if (schmidt_m > 0) {
        double E = 0;
        for (long m = 1; m <= schmidt_m; ++m) E += measure(fam, m);
        est.E_schmidt = E;
        double lg = std::max(std::log(E), 1e-6);
        for (long id = 0; id < samples; ++id) {
            double d = std::fabs(static_cast<double>(est.diag_counts[id]) - E);
            est.schmidt.push_back(d / (std::sqrt(E) * lg * lg));
        }
    }
    return est;
}

// --- spectral input data ----------------------------------------------------

double SpectralConfig::delta() const {
    double top = 0;
    for (double s : exceptional_exponents) top = std::max(top, s);
    return model.rho() - top;
}

void SpectralConfig::check() const {
    for (double s : exceptional_exponents)
        if (!(s > 0 && s < model.rho()))
            throw std::invalid_argument("exceptional exponent outside (0, rho)");
    if (alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
}

double predicted_kappa(const SpectralConfig& sc, const FlowSpec& spec) {
    if (spec.kind == FlowSpec::Kind::Diagonalizable) return 0.5;
    return std::min(0.5 * spec.rank, sc.delta());
}

}  // namespace stf
