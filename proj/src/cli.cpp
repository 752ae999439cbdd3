#include "stf/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "stf/spectral.hpp"

namespace stf {

namespace {

using json = nlohmann::json;

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("bad numeric value for '" + key + "': " + v);
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long l = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return l;
    } catch (const std::exception&) {
        throw config_error("bad integer value for '" + key + "': " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw config_error("bad unsigned value for '" + key + "': " + v);
    }
}

std::string fmt(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

}  // namespace

std::map<std::string, std::string> parse_kv(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t");
            std::size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lattice") cfg.lattice = value;
    else if (key == "flow") cfg.flow = value;
    else if (key == "c") cfg.c = to_double(key, value);
    else if (key == "rank") cfg.rank = static_cast<int>(to_long(key, value));
    else if (key == "experiment") cfg.experiment = value;
    else if (key == "target") cfg.target = value;
    else if (key == "schedule") cfg.schedule = value;
    else if (key == "eta") cfg.eta = to_double(key, value);
    else if (key == "a") cfg.a = to_double(key, value);
    else if (key == "cap") cfg.cap = to_double(key, value);
    else if (key == "epsilon") cfg.epsilon = to_double(key, value);
    else if (key == "radius") cfg.radius = to_double(key, value);
    else if (key == "height") cfg.height = to_double(key, value);
    else if (key == "m_max") cfg.m_max = to_long(key, value);
    else if (key == "m_grid") {
        if (value != "dyadic") throw config_error("m_grid: only 'dyadic' is supported");
    } else if (key == "f_index") cfg.f_index = to_long(key, value);
    else if (key == "window_lo") cfg.window_lo = to_long(key, value);
    else if (key == "window_hi") cfg.window_hi = to_long(key, value);
    else if (key == "schmidt_m") cfg.schmidt_m = to_long(key, value);
    else if (key == "samples") cfg.samples = to_long(key, value);
    else if (key == "seed") {
        cfg.seed = to_u64(key, value);
        cfg.seed_set = true;
    } else if (key == "workers") cfg.workers = static_cast<int>(to_long(key, value));
    else if (key == "s_re") cfg.s_re = to_double(key, value);
    else if (key == "s_im") cfg.s_im = to_double(key, value);
    else if (key == "t_max") cfg.t_max = to_double(key, value);
    else if (key == "t_steps") cfg.t_steps = to_long(key, value);
    else if (key == "quantile") cfg.quantile = to_double(key, value);
    else if (key == "count_exponent") cfg.count_exponent = to_double(key, value);
    else if (key == "output") cfg.output = value;
    else if (key == "format") cfg.format = value;
    else throw config_error("unknown config key: " + key);
}

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : kv) apply_override(cfg, k, v);
    return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "a=" << fmt(cfg.a) << "\nc=" << fmt(cfg.c) << "\ncap=" << fmt(cfg.cap)
       << "\ncount_exponent=" << fmt(cfg.count_exponent) << "\nepsilon=" << fmt(cfg.epsilon)
       << "\neta=" << fmt(cfg.eta) << "\nexperiment=" << cfg.experiment
       << "\nf_index=" << cfg.f_index << "\nflow=" << cfg.flow << "\nformat=" << cfg.format
       << "\nheight=" << fmt(cfg.height) << "\nlattice=" << cfg.lattice
       << "\nm_max=" << cfg.m_max << "\nquantile=" << fmt(cfg.quantile)
       << "\nradius=" << fmt(cfg.radius) << "\nrank=" << cfg.rank
       << "\ns_im=" << fmt(cfg.s_im) << "\ns_re=" << fmt(cfg.s_re)
       << "\nsamples=" << cfg.samples << "\nschedule=" << cfg.schedule
       << "\nschmidt_m=" << cfg.schmidt_m << "\nseed=" << cfg.seed
       << "\nt_max=" << fmt(cfg.t_max) << "\nt_steps=" << cfg.t_steps
       << "\ntarget=" << cfg.target << "\nwindow_hi=" << cfg.window_hi
       << "\nwindow_lo=" << cfg.window_lo << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::string s = canonical_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> out;
    auto err = [&](std::string m) { out.push_back({Diagnostic::Level::Error, std::move(m)}); };
    auto warn = [&](std::string m) { out.push_back({Diagnostic::Level::Warning, std::move(m)}); };

    static const char* experiments[] = {"orbit", "loglaw", "hits",   "ah",     "met",
                                        "qi",    "spherical", "sample", "measure"};
    bool known = false;
    for (const char* e : experiments) known = known || cfg.experiment == e;
    if (!known) err("experiment must be one of orbit|loglaw|hits|ah|met|qi|spherical|sample|measure");
    if (cfg.lattice != "modular" && cfg.lattice != "picard") err("lattice must be modular|picard");
    if (cfg.flow != "diag" && cfg.flow != "unipotent") err("flow must be diag|unipotent");
    if (cfg.target != "ball" && cfg.target != "cusp") err("target must be ball|cusp");
    if (cfg.schedule != "power" && cfg.schedule != "loglaw" && cfg.schedule != "fixed")
        err("schedule must be power|loglaw|fixed");
    if (cfg.format != "csv" && cfg.format != "jsonl") err("format must be csv|jsonl");
    if (!cfg.seed_set) err("seed is mandatory (no wall-clock default)");
    if (cfg.flow == "diag" && cfg.c <= 0) err("diag flow needs c > 0");
    if (cfg.flow == "unipotent" && cfg.rank < 1) err("unipotent flow needs rank >= 1");
    if (cfg.samples < 1) err("samples must be >= 1");
    if (cfg.workers < 1) err("workers must be >= 1");
    if (cfg.m_max < 1) err("m_max must be >= 1");
    if (cfg.schedule == "loglaw" && std::fabs(cfg.epsilon) >= 1) err("loglaw needs |epsilon| < 1");
    if (cfg.schedule == "power" && (cfg.a <= 0 || cfg.cap <= 0 || cfg.eta < 0))
        err("power schedule needs a > 0, cap > 0, eta >= 0");
    if (cfg.schedule == "fixed" && cfg.target == "ball" && cfg.radius <= 0)
        err("fixed ball schedule needs radius > 0");
    if (cfg.schedule == "fixed" && cfg.target == "cusp" && cfg.height < 1)
        err("fixed cusp schedule needs height >= 1");
    if ((cfg.experiment == "ah" || cfg.experiment == "qi") && cfg.window_lo >= cfg.window_hi)
        err("window_lo must be < window_hi");
    if (cfg.quantile <= 0 || cfg.quantile >= 1) err("quantile must lie in (0, 1)");
    if (cfg.experiment == "spherical" && (cfg.t_max <= 0 || cfg.t_steps < 2))
        err("spherical needs t_max > 0 and t_steps >= 2");

    bool shrinking = cfg.experiment == "hits" || cfg.experiment == "ah" || cfg.experiment == "qi";
    if (cfg.lattice == "modular" && cfg.flow == "unipotent" && shrinking)
        warn("n = 2 with a unipotent flow: the clean hitting limit needs n >= 3; "
             "the n = 2 case requires the stronger target hypothesis");
    if (cfg.experiment == "hits" && cfg.schedule == "power" && cfg.eta >= 1)
        warn("eta >= 1: the hitting-count regime predicts eventually empty intersections");
    if (cfg.experiment == "qi" && cfg.schedule == "power" && cfg.eta < 1)
        warn("eta < 1: m mu(B_m) is unbounded, outside the quasi-independence hypothesis");
    return out;
}

// --- experiment plumbing ----------------------------------------------------

namespace {

const Lattice& the_lattice(const ExperimentConfig& cfg) {
    return cfg.lattice == "picard" ? Lattice::picard() : Lattice::modular();
}

FlowSpec the_flow(const ExperimentConfig& cfg, const Lattice& lat) {
    if (cfg.flow == "diag") return FlowSpec::diagonalizable(cfg.c, lat.model);
    return FlowSpec::unipotent(cfg.rank, lat.model);
}

TargetFamily build_target(const ExperimentConfig& cfg, const Lattice& lat) {
    if (cfg.target == "ball") {
        QuotientPoint center = default_ball_center(lat);
        if (cfg.schedule == "loglaw") return schedule_loglaw_ball(center, cfg.epsilon);
        if (cfg.schedule == "fixed")
            return TargetFamily::ball(center, [r = cfg.radius](long) { return r; });
        return TargetFamily::ball_with_measure(center, [a = cfg.a, cap = cfg.cap, eta = cfg.eta](
                                                           long m) {
            return std::min(cap, a * std::pow(static_cast<double>(m), -eta));
        });
    }
    if (cfg.schedule == "loglaw") return schedule_loglaw_cusp(lat, cfg.epsilon);
    if (cfg.schedule == "fixed")
        return TargetFamily::cusp(lat, [y = cfg.height](long) { return y; });
    return TargetFamily::cusp_with_measure(lat, [a = cfg.a, cap = cfg.cap, eta = cfg.eta](long m) {
        return std::min(cap, a * std::pow(static_cast<double>(m), -eta));
    });
}

void run_orbit(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    FlowSpec flow = the_flow(cfg, lat);
    HaarSampler sampler(lat, cfg.seed, 0);
    QuotientPoint x0 = reduce(GroupElement::identity(lat.model), lat);
    std::vector<BasePoint> trans = translates_of(x0, 2);
    std::vector<long> grid = dyadic_grid(1, cfg.m_max);

    res.columns = {"m", "x1", "x2", "y", "height", "dist"};
    OrbitCursor cur = make_cursor(sampler.sample(), flow);
    double max_h = -1e300;
    std::size_t gi = 0;
    for (long m = 1; m <= cfg.m_max; ++m) {
        cur.advance();
        max_h = std::max(max_h, cusp_height(cur.current));
        if (m == grid[gi]) {
            const BasePoint& b = cur.current.base;
            res.rows.push_back({m, b.x1, b.x2, b.y, cusp_height(cur.current),
                                acosh_clamped(min_cosh_dist(b, trans))});
            ++gi;
        }
    }
    res.aggregate = {{"m_max", cfg.m_max},
                     {"final_height", cusp_height(cur.current)},
                     {"max_height", max_h}};
}

void run_loglaw(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    LoglawResult r = loglaw_experiment(lat, the_flow(cfg, lat), cfg.samples, cfg.m_max, cfg.seed,
                                       cfg.workers, cfg.count_exponent);
    res.columns = {"sample", "cusp_ratio", "ball_ratio", "exact_hit", "cusp_exceed_count",
                   "ball_close_count"};
    std::vector<double> cs, bs;
    for (const LoglawSample& row : r.rows) {
        res.rows.push_back({row.sample_id, row.cusp_ratio.back(), row.ball_ratio.back(),
                            row.exact_hit ? 1 : 0, row.cusp_exceed_count, row.ball_close_count});
        cs.push_back(row.cusp_ratio.back());
        bs.push_back(row.ball_ratio.back());
    }
    res.aggregate = {{"median_cusp", r.median_cusp.back()},
                     {"median_ball", r.median_ball.back()},
                     {"median_cusp_early", r.median_cusp.front()},
                     {"median_ball_early", r.median_ball.front()},
                     {"cusp_q", quantile(cs, cfg.quantile)},
                     {"ball_q", quantile(bs, cfg.quantile)}};
}

void run_hits(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    FlowSpec flow = the_flow(cfg, lat);
    TargetFamily fam = build_target(cfg, lat);
    std::vector<long> grid = dyadic_grid(std::min<long>(16, cfg.m_max), cfg.m_max);

    std::vector<HitRecord> recs(cfg.samples);
    parallel_samples(cfg.samples, cfg.workers, [&](long id) {
        HaarSampler sampler(lat, cfg.seed, static_cast<std::uint64_t>(id));
        recs[id] = hit_counts(sampler.sample(), flow, fam, grid);
        recs[id].sample_id = id;
    });

    res.columns = {"sample", "m", "diag_count", "frozen_count"};
    std::vector<double> diag_f, frozen_f;
    for (const HitRecord& rec : recs) {
        for (std::size_t gi = 0; gi < grid.size(); ++gi)
            res.rows.push_back(
                {rec.sample_id, grid[gi], rec.hit_count_diag[gi], rec.hit_count_frozen[gi]});
        diag_f.push_back(static_cast<double>(rec.hit_count_diag.back()));
        frozen_f.push_back(static_cast<double>(rec.hit_count_frozen.back()));
    }
    res.aggregate = {{"median_diag", median(diag_f)}, {"median_frozen", median(frozen_f)}};
    if (has_exact_measure(fam, 1)) {
        double sum_mu = 0;
        for (long m = 1; m <= cfg.m_max; ++m) sum_mu += measure(fam, m);
        std::vector<double> sbc;
        for (double d : diag_f) sbc.push_back(d / sum_mu);
        res.aggregate["sum_mu"] = sum_mu;
        res.aggregate["median_sbc_ratio"] = median(sbc);
    }
}

void run_ah(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    AhResult r = always_hitting_experiment(build_target(cfg, lat), the_flow(cfg, lat), cfg.samples,
                                           cfg.window_lo, cfg.window_hi, cfg.seed, cfg.workers);
    res.columns = {"level", "miss_count"};
    for (std::size_t i = 0; i < r.levels.size(); ++i)
        res.rows.push_back({r.levels[i], r.level_miss_counts[i]});
    res.aggregate = {{"fraction", r.fraction},
                     {"always_hitters", r.always_hitters},
                     {"samples", r.samples}};
}

void run_met(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    TargetFamily fam = build_target(cfg, lat);
    std::vector<long> grid = dyadic_grid(std::min<long>(16, cfg.m_max), cfg.m_max);
    MetEstimate est = met_experiment(fam, cfg.f_index, the_flow(cfg, lat), grid, cfg.samples,
                                     cfg.seed, cfg.workers);
    res.columns = {"m", "norm", "norm_se", "atypical_fraction", "empty_fraction"};
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        res.rows.push_back({grid[gi], est.norms[gi], est.norm_se[gi], est.atypical_fraction[gi],
                            est.empty_fraction[gi]});
    res.aggregate = {{"mu_f", est.mu_f},
                     {"kappa_defined", est.kappa_defined ? 1 : 0},
                     {"kappa", est.kappa_defined ? est.kappa : std::nan("")},
                     {"kappa_se", est.kappa_se}};
}

void run_qi(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    TargetFamily fam = build_target(cfg, lat);
    QiEstimate est = qi_experiment(fam, the_flow(cfg, lat), cfg.window_lo, cfg.window_hi,
                                   cfg.samples, cfg.seed, cfg.workers, cfg.schmidt_m);
    res.columns = {"m", "mu", "row_abs_sum"};
    for (long w = 0; w < est.N - est.M + 1; ++w)
        res.rows.push_back({est.M + w, measure(fam, est.M + w), est.row_abs_sums[w]});
    res.aggregate = {{"sum_abs_R", est.sum_abs_R},
                     {"sum_mu", est.sum_mu},
                     {"ratio", est.ratio}};
    if (cfg.schmidt_m > 0) {
        res.aggregate["E_schmidt"] = est.E_schmidt;
        res.aggregate["schmidt_q"] = quantile(est.schmidt, cfg.quantile);
        res.aggregate["schmidt_max"] = *std::max_element(est.schmidt.begin(), est.schmidt.end());
    }
}

void run_spherical(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    std::complex<double> s(cfg.s_re, cfg.s_im);
    int n = lat.model.n;
    res.columns = {"t", "re", "im", "abs"};
    std::vector<double> ts;
    for (long i = 0; i <= cfg.t_steps; ++i) {
        double t = cfg.t_max * static_cast<double>(i) / static_cast<double>(cfg.t_steps);
        std::complex<double> v = spherical_fn(s, t, n);
        res.rows.push_back({t, v.real(), v.imag(), std::abs(v)});
        if (t > 0) ts.push_back(t);
    }
    EnvelopeFit fit = decay_envelope_check(s, ts, n);
    res.aggregate = {{"slope", fit.slope}, {"slope_se", fit.slope_se}, {"envelope", fit.envelope}};
}

void run_sample(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    HaarSampler sampler(lat, cfg.seed, 0);
    res.columns = {"sample", "x1", "x2", "y"};
    for (long i = 0; i < cfg.samples; ++i) {
        QuotientPoint p = sampler.sample();
        res.rows.push_back({i, p.base.x1, p.base.x2, p.base.y});
    }
    res.aggregate = {{"samples", cfg.samples},
                     {"acceptance_rate", static_cast<double>(sampler.accepts()) /
                                             static_cast<double>(sampler.proposals())}};
}

void run_measure(const ExperimentConfig& cfg, ExperimentResult& res) {
    const Lattice& lat = the_lattice(cfg);
    TargetFamily fam = build_target(cfg, lat);
    res.columns = {"m", "value", "std_err", "exact"};
    double value, se = 0;
    int exact = has_exact_measure(fam, cfg.f_index) ? 1 : 0;
    if (exact) {
        value = measure(fam, cfg.f_index);
    } else {
        HaarSampler sampler(lat, cfg.seed, 0);
        value = measure_mc(fam, cfg.f_index, sampler, cfg.samples, &se);
    }
    res.rows.push_back({cfg.f_index, value, se, exact});
    res.aggregate = {{"value", value}, {"std_err", se}, {"exact", exact}};
}

std::string resolve_output(const ExperimentConfig& cfg) {
    std::filesystem::path p = cfg.output.empty()
                                  ? std::filesystem::path(cfg.experiment + "." + cfg.format)
                                  : std::filesystem::path(cfg.output);
    if (p.is_relative())
        if (const char* dir = std::getenv("STFLOW_OUTPUT_DIR")) p = std::filesystem::path(dir) / p;
    return p.string();
}

std::string cell_csv(const json& c) {
    if (c.is_string()) {
        std::string s = c.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }
    if (c.is_number_float()) return fmt(c.get<double>());
    return c.dump();
}

}  // namespace

std::string render_csv(const ExperimentResult& res) {
    std::string out;
    for (std::size_t i = 0; i < res.columns.size(); ++i)
        out += (i ? "," : "") + res.columns[i];
    out += "\n";
    for (const auto& row : res.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_csv(row[i]);
        out += "\n";
    }
    return out;
}

std::string render_jsonl(const ExperimentResult& res) {
    std::string out;
    for (const auto& row : res.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) o[res.columns[i]] = row[i];
        out += o.dump() + "\n";
    }
    return out;
}

ExperimentResult run(const ExperimentConfig& cfg) {
    for (const Diagnostic& d : validate(cfg))
        if (d.level == Diagnostic::Level::Error) throw config_error(d.message);

    ExperimentResult res;
    res.config_hash = config_hash(cfg);
    auto t0 = std::chrono::steady_clock::now();

    if (cfg.experiment == "orbit") run_orbit(cfg, res);
    else if (cfg.experiment == "loglaw") run_loglaw(cfg, res);
    else if (cfg.experiment == "hits") run_hits(cfg, res);
    else if (cfg.experiment == "ah") run_ah(cfg, res);
    else if (cfg.experiment == "met") run_met(cfg, res);
    else if (cfg.experiment == "qi") run_qi(cfg, res);
    else if (cfg.experiment == "spherical") run_spherical(cfg, res);
    else if (cfg.experiment == "sample") run_sample(cfg, res);
    else run_measure(cfg, res);

    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    res.output_path = resolve_output(cfg);
    std::ofstream f(res.output_path, std::ios::binary);
    if (!f) throw config_error("cannot open output file: " + res.output_path);
    f << (cfg.format == "jsonl" ? render_jsonl(res) : render_csv(res));
    return res;
}

}  // namespace stf
