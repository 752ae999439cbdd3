#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stf/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"shrinking-target experiments on hyperbolic quotients"};
    std::string config_path;
    std::vector<std::string> overrides;
    bool print_config = false, check_only = false;
    app.add_option("-c,--config", config_path, "key=value config file (one experiment per file)");
    app.add_option("-s,--set", overrides, "override a config key, e.g. --set seed=42");
    app.add_flag("--print-config", print_config, "print the canonical config and exit");
    app.add_flag("--check", check_only, "validate only; print diagnostics and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        stf::ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw stf::config_error("cannot open config file: " + config_path);
            cfg = stf::config_from_kv(stf::parse_kv(f));
        }
        for (const std::string& ov : overrides) {
            std::size_t eq = ov.find('=');
            if (eq == std::string::npos)
                throw stf::config_error("--set expects key=value, got: " + ov);
            stf::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
        }

        if (print_config) {
            std::cout << stf::canonical_config(cfg);
            return 0;
        }

        std::vector<stf::Diagnostic> diags = stf::validate(cfg);
        for (const stf::Diagnostic& d : diags)
            std::cerr << (d.level == stf::Diagnostic::Level::Error ? "error: " : "warning: ")
                      << d.message << "\n";
        if (check_only) {
            for (const stf::Diagnostic& d : diags)
                if (d.level == stf::Diagnostic::Level::Error) return 2;
            return 0;
        }

        stf::ExperimentResult res = stf::run(cfg);
        std::printf("config_hash=%016llx rows=%zu file=%s runtime=%.3fs\n",
                    static_cast<unsigned long long>(res.config_hash), res.rows.size(),
                    res.output_path.c_str(), res.runtime_seconds);
        for (const auto& [key, value] : res.aggregate.items())
            std::cout << key << "=" << (value.is_string() ? value.get<std::string>()
                                                          : value.dump())
                      << "\n";
        return 0;
    } catch (const stf::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
