#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stf/stats.hpp"

namespace stf {

// One experiment per config.  Every field has a documented key in the
// key=value config format; CLI overrides are applied on top.
struct ExperimentConfig {
    std::string lattice = "modular";  // modular | picard
    std::string flow = "diag";        // diag | unipotent
    double c = 1.0;                   // diag step length
    int rank = 1;                     // unipotent rank d

    std::string experiment;  // orbit|loglaw|hits|ah|met|qi|spherical|sample|measure
    std::string target = "ball";      // ball | cusp
    std::string schedule = "power";   // power | loglaw | fixed
    double eta = 0.5;                 // power: mu(m) = min(cap, a m^-eta)
    double a = 0.1;
    double cap = 0.3;
    double epsilon = 0.0;             // loglaw schedule parameter, |epsilon| < 1
    double radius = 0.1;              // fixed ball radius
    double height = 2.0;              // fixed cusp height

    long m_max = 1000;
    long f_index = 1;                 // met/measure: the frozen family index
    long window_lo = 100;             // ah/qi window
    long window_hi = 1000;
    long schmidt_m = 0;               // qi: counting-discrepancy horizon (0 = off)

    long samples = 100;
    bool seed_set = false;            // the seed key is mandatory; no wall-clock default
    std::uint64_t seed = 0;
    int workers = 1;

    double s_re = 0, s_im = 1;        // spherical: spectral parameter
    double t_max = 20.0;
    long t_steps = 80;

    double quantile = 0.9;            // reported sample quantile
    double count_exponent = 0.5;      // loglaw experiment threshold exponent c

    std::string output;               // data file path; empty = <experiment>.<fmt>
    std::string format = "csv";       // csv | jsonl
};

struct Diagnostic {
    enum class Level { Error, Warning };
    Level level;
    std::string message;
};

struct ExperimentResult {
    std::uint64_t config_hash = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
    nlohmann::json aggregate;  // object printed as the stdout summary row
    std::string output_path;
    double runtime_seconds = 0;
};

// key=value lines, '#' comments, blank lines ignored.  Unknown keys and
// malformed values throw config_error.
std::map<std::string, std::string> parse_kv(std::istream& in);
ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Canonical serialization (sorted key=value lines) and its FNV-1a hash; the
// hash names the run in outputs.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Contract violations come back as errors; regimes outside a theorem's
// hypotheses come back as warnings.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

// Dispatches to the library, writes the data file, returns rows + aggregate.
// Throws config_error on invalid configs and lets numeric errors propagate.
ExperimentResult run(const ExperimentConfig& cfg);

// Serialize the data section exactly as written to the file.
std::string render_csv(const ExperimentResult& res);
std::string render_jsonl(const ExperimentResult& res);

}  // namespace stf
