#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "antsel/errors.hpp"
#include "antsel/experiment.hpp"

namespace {

std::uint64_t parse_seed_env(const char* text) {
    std::string value(text);
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw antsel::ConfigError("ANTSEL_SEED must be a non-negative integer");
    }
    errno = 0;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(value.c_str(), &end, 10);
    if (errno != 0 || end != value.c_str() + value.size()) {
        throw antsel::ConfigError("ANTSEL_SEED is out of range");
    }
    return parsed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmit-antenna subset selection for a simulated MIMO-OFDM link: "
                 "genetic-algorithm optimizers, an exhaustive oracle, and experiment "
                 "harness commands that emit CSV/JSON artifacts."};
    app.set_version_flag("--version", "0.1.0");
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir;
    long long oracle_budget = -1;
    int jobs = 1;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"run", "run the configured strategy over the full (n_t, snr, replicate) grid"},
        {"sweep-snr", "mean selected-subset capacity per (n_t, snr) cell"},
        {"convergence", "adaptive vs plain traces on identical batches and seeds"},
        {"compare", "adaptive vs plain vs exhaustive oracle per cell"},
        {"oracle", "exhaustive search with ranked subset lists"}};
    for (const auto& entry : commands) {
        CLI::App* sub = app.add_subcommand(entry.first, entry.second);
        sub->add_option("--spec", spec_path, "experiment spec JSON file")->required();
        sub->add_option("--out", out_dir, "override the spec's output directory");
        sub->add_option("--oracle-budget", oracle_budget,
                        "largest C(n_tx, n_t) the oracle may enumerate (default 1000000)");
        sub->add_option("--jobs", jobs, "worker threads for independent cells (default 1)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        antsel::RunOptions options;
        if (!out_dir.empty()) {
            options.out_override = out_dir;
        }
        if (oracle_budget >= 0) {
            options.oracle_budget = oracle_budget;
        }
        options.jobs = jobs;
        if (const char* env = std::getenv("ANTSEL_SEED")) {
            options.seed_override = parse_seed_env(env);
        }

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "run") {
            antsel::cmd_run(spec_path, options);
        } else if (name == "sweep-snr") {
            antsel::cmd_sweep_snr(spec_path, options);
        } else if (name == "convergence") {
            antsel::cmd_convergence(spec_path, options);
        } else if (name == "compare") {
            antsel::cmd_compare(spec_path, options);
        } else {
            antsel::cmd_oracle(spec_path, options);
        }
        return 0;
    } catch (const antsel::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const antsel::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const antsel::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const antsel::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
