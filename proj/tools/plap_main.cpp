// plap: solve and explore -Delta_p u = lambda c |u|^{p-2} u + mu |grad u|^p + k h.
#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "plap/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"p-Laplacian problems with critical gradient growth"};
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::uint64_t seed = 0;
        bool has_seed = false;
        int threads = -1;
        std::string out;
    };

    std::map<std::string, plap::Subcommand> names = {
        {"solve", plap::Subcommand::solve},
        {"branch", plap::Subcommand::branch},
        {"regions", plap::Subcommand::regions},
        {"spectra", plap::Subcommand::spectra},
        {"verify", plap::Subcommand::verify},
    };
    std::map<std::string, Common> opts;
    for (auto& [name, sub] : names) {
        auto* s = app.add_subcommand(name);
        auto& c = opts[name];
        s->add_option("--config", c.config, "scenario file")->required();
        s->add_option("--seed", c.seed, "override the run seed");
        s->add_option("--threads", c.threads, "worker threads (0 = hardware)");
        s->add_option("--out", c.out, "output directory");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [name, sub] : names) {
        auto* s = app.get_subcommand(name);
        if (!s->parsed()) continue;
        const Common& c = opts[name];
        std::vector<plap::ConfigError> errors;
        auto sc = plap::parse_config_file(c.config, sub, errors);
        if (!sc) {
            for (const auto& e : errors)
                std::cerr << c.config << ":" << e.line << ": " << e.message << "\n";
            return plap::exit_usage;
        }
        if (s->count("--seed")) sc->seed = c.seed;
        if (c.threads >= 0) sc->threads = c.threads;
        if (!c.out.empty()) sc->out_dir = c.out;
        try {
            return plap::run_scenario(*sc, sub);
        } catch (const std::exception& e) {
            std::cerr << "plap: " << e.what() << "\n";
            return plap::exit_no_convergence;
        }
    }
    return plap::exit_usage;
}
