#include "antsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "antsel/errors.hpp"
#include "antsel/io.hpp"
#include "antsel/oracle.hpp"

namespace antsel {

namespace fs = std::filesystem;

std::string to_string(SeedPolicy policy) {
    return policy == SeedPolicy::fixed ? "fixed" : "per_replicate";
}

SeedPolicy seed_policy_from_string(const std::string& name) {
    if (name == "per_replicate") {
        return SeedPolicy::per_replicate;
    }
    if (name == "fixed") {
        return SeedPolicy::fixed;
    }
    throw ConfigError("experiment spec: unknown seed_policy '" + name + "'");
}

void ExperimentSpec::validate() const {
    channel.validate();
    {
        // the per-cell subset size comes from nt_grid; probe the rest
        GaConfig probe = ga;
        probe.subset_size = 1;
        probe.validate(channel.n_tx);
    }
    if (snr_grid.empty()) {
        throw ConfigError("experiment spec: snr_grid must be non-empty");
    }
    if (nt_grid.empty()) {
        throw ConfigError("experiment spec: nt_grid must be non-empty");
    }
    for (std::size_t i = 0; i < nt_grid.size(); ++i) {
        if (nt_grid[i] < 1 || nt_grid[i] > channel.n_tx) {
            throw ConfigError("experiment spec: nt_grid[" + std::to_string(i) + "] = " +
                              std::to_string(nt_grid[i]) + " must lie in [1, n_tx = " +
                              std::to_string(channel.n_tx) + "]");
        }
    }
    if (repetitions < 1) {
        throw ConfigError("experiment spec: repetitions must be at least 1");
    }
    if (output_dir.empty()) {
        throw ConfigError("experiment spec: output_dir must be non-empty");
    }
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("experiment spec: expected a JSON object");
    }
    static const char* known[] = {"channel",     "ga",         "snr_grid", "nt_grid",
                                  "repetitions", "output_dir", "seed_policy"};
    for (const auto& item : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                return item.key() == k;
            }) == std::end(known)) {
            throw ConfigError("experiment spec: unknown key '" + item.key() + "'");
        }
    }
    for (const char* key : {"channel", "ga", "snr_grid", "nt_grid", "output_dir"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("experiment spec: missing key '") + key + "'");
        }
    }

    ExperimentSpec spec;
    spec.channel = ChannelConfig::from_json(j.at("channel"));
    spec.ga = GaConfig::from_json(j.at("ga"), /*require_subset_size=*/false);
    if (!j.at("snr_grid").is_array()) {
        throw ConfigError("experiment spec: 'snr_grid' must be an array of numbers");
    }
    for (const auto& v : j.at("snr_grid")) {
        if (!v.is_number()) {
            throw ConfigError("experiment spec: 'snr_grid' must be an array of numbers");
        }
        spec.snr_grid.push_back(v.get<double>());
    }
    if (!j.at("nt_grid").is_array()) {
        throw ConfigError("experiment spec: 'nt_grid' must be an array of integers");
    }
    for (const auto& v : j.at("nt_grid")) {
        if (!v.is_number_integer()) {
            throw ConfigError("experiment spec: 'nt_grid' must be an array of integers");
        }
        spec.nt_grid.push_back(v.get<int>());
    }
    if (j.contains("repetitions")) {
        if (!j.at("repetitions").is_number_integer()) {
            throw ConfigError("experiment spec: 'repetitions' must be an integer");
        }
        spec.repetitions = j.at("repetitions").get<int>();
    }
    if (!j.at("output_dir").is_string()) {
        throw ConfigError("experiment spec: 'output_dir' must be a string");
    }
    spec.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seed_policy")) {
        if (!j.at("seed_policy").is_string()) {
            throw ConfigError("experiment spec: 'seed_policy' must be a string");
        }
        spec.seed_policy = seed_policy_from_string(j.at("seed_policy").get<std::string>());
    }
    spec.validate();
    return spec;
}

ExperimentSpec ExperimentSpec::load(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // parse_error reports a byte offset; convert it to a line number
        std::size_t byte = std::min(text.size(), static_cast<std::size_t>(e.byte));
        long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentSpec::to_json() const {
    return nlohmann::json{{"channel", channel.to_json()},
                          {"ga", ga.to_json()},
                          {"snr_grid", snr_grid},
                          {"nt_grid", nt_grid},
                          {"repetitions", repetitions},
                          {"output_dir", output_dir},
                          {"seed_policy", to_string(seed_policy)}};
}

namespace {

constexpr long long kDefaultOracleBudget = 1000000;

struct Resolved {
    ExperimentSpec spec;
    fs::path out_dir;
    std::uint64_t base_seed = 0;
    long long oracle_budget = kDefaultOracleBudget;
    int jobs = 1;
};

Resolved resolve(const fs::path& spec_path, const RunOptions& options) {
    Resolved r;
    r.spec = ExperimentSpec::load(spec_path);
    if (options.seed_override) {
        r.spec.channel.seed = *options.seed_override;
    }
    if (options.out_override) {
        r.spec.output_dir = *options.out_override;
    }
    r.out_dir = fs::path(r.spec.output_dir);
    r.base_seed = r.spec.channel.seed;
    if (options.oracle_budget) {
        r.oracle_budget = *options.oracle_budget;
    }
    r.jobs = std::max(1, options.jobs);
    return r;
}

std::uint64_t seed_for_rep(const Resolved& r, int rep) {
    if (r.spec.seed_policy == SeedPolicy::fixed) {
        return r.base_seed;
    }
    return r.base_seed + static_cast<std::uint64_t>(rep);
}

std::string cell_dir_name(int n_t, double snr_db) {
    return "nt" + std::to_string(n_t) + "_snr" + format_compact(snr_db);
}

/// One (n_t, snr, replicate) grid point, by grid indices.
struct Cell {
    int nt_idx = 0;
    int snr_idx = 0;
    int rep = 0;
};

std::vector<Cell> enumerate_cells(const Resolved& r) {
    std::vector<Cell> cells;
    cells.reserve(r.spec.nt_grid.size() * r.spec.snr_grid.size() *
                  static_cast<std::size_t>(r.spec.repetitions));
    for (std::size_t nt = 0; nt < r.spec.nt_grid.size(); ++nt) {
        for (std::size_t snr = 0; snr < r.spec.snr_grid.size(); ++snr) {
            for (int rep = 0; rep < r.spec.repetitions; ++rep) {
                cells.push_back(Cell{static_cast<int>(nt), static_cast<int>(snr), rep});
            }
        }
    }
    return cells;
}

/// One shared batch per replicate; every cell of a replicate reuses it so
/// strategies and the oracle are compared on identical channel draws.
std::vector<RealizationBatch> make_batches(const Resolved& r) {
    std::vector<RealizationBatch> batches;
    batches.reserve(static_cast<std::size_t>(r.spec.repetitions));
    for (int rep = 0; rep < r.spec.repetitions; ++rep) {
        ChannelConfig cfg = r.spec.channel;
        cfg.seed = seed_for_rep(r, rep);
        batches.push_back(generate_batch(cfg, r.spec.ga.fitness_batch_size, cfg.seed));
    }
    return batches;
}

GaConfig cell_config(const Resolved& r, const Cell& cell, MutationStrategy strategy) {
    GaConfig cfg = r.spec.ga;
    cfg.subset_size = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
    cfg.seed = seed_for_rep(r, cell.rep);
    cfg.mutation_strategy = strategy;
    return cfg;
}

/// Index-addressed work queue; results must be written into pre-sized slots
/// so the merge order never depends on thread scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

std::string timestamp_utc() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

/// spec.json records the effective configuration (overrides applied);
/// metadata.json is the only output allowed to differ between reruns.
void write_common(const Resolved& r, const char* command) {
    fs::create_directories(r.out_dir);
    write_text_file(r.out_dir / "spec.json", r.spec.to_json().dump(2) + "\n");
    nlohmann::json meta{
        {"command", command}, {"created_utc", timestamp_utc()}, {"jobs", r.jobs}};
    write_text_file(r.out_dir / "metadata.json", meta.dump(2) + "\n");
}

nlohmann::json run_json(const Resolved& r, const Cell& cell, MutationStrategy strategy,
                        const GaResult& result, const std::string& trace_rel) {
    return nlohmann::json{
        {"n_t", r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)]},
        {"snr_db", round_to(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)])},
        {"replicate", cell.rep},
        {"seed", seed_for_rep(r, cell.rep)},
        {"strategy", to_string(strategy)},
        {"best_subset", result.best.subset.positions()},
        {"capacity", round_to(*result.best.fitness)},
        {"evaluations", result.trace.evaluations},
        {"cache_hits", result.trace.cache_hits},
        {"trace", trace_rel}};
}

std::string trace_to_string(const RunTrace& trace) {
    std::ostringstream os;
    trace.write_csv(os);
    return os.str();
}

/// The first generation whose best fitness already equals the final one;
/// well-defined because best fitness is non-decreasing.
int generations_to_final(const RunTrace& trace) {
    double final_value = trace.per_generation.back().best_fitness;
    for (const auto& row : trace.per_generation) {
        if (row.best_fitness == final_value) {
            return row.generation;
        }
    }
    return trace.per_generation.back().generation;
}

double median_of_ints(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return (values[mid - 1] + values[mid]) / 2.0;
}

}  // namespace

void cmd_run(const fs::path& spec_path, const RunOptions& options) {
    Resolved r = resolve(spec_path, options);
    std::vector<RealizationBatch> batches = make_batches(r);
    std::vector<Cell> cells = enumerate_cells(r);
    std::vector<std::optional<GaResult>> results(cells.size());
    parallel_for(cells.size(), r.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        results[i] = run_on_batch(
            batches[static_cast<std::size_t>(cell.rep)],
            cell_config(r, cell, r.spec.ga.mutation_strategy),
            Snr::from_db(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)]));
    });

    write_common(r, "run");
    std::string aggregate = "n_t,snr_db,capacity,best_subset\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        const GaResult& result = *results[i];
        int n_t = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
        double snr_db = r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)];
        std::string cell_name = cell_dir_name(n_t, snr_db);
        fs::create_directories(r.out_dir / "runs" / cell_name);
        fs::create_directories(r.out_dir / "traces" / cell_name);
        std::string rep_name = "rep" + std::to_string(cell.rep);
        std::string trace_rel = "traces/" + cell_name + "/" + rep_name + ".csv";
        write_text_file(r.out_dir / "traces" / cell_name / (rep_name + ".csv"),
                        trace_to_string(result.trace));
        write_text_file(
            r.out_dir / "runs" / cell_name / (rep_name + ".json"),
            run_json(r, cell, r.spec.ga.mutation_strategy, result, trace_rel).dump(2) + "\n");
        aggregate += std::to_string(n_t) + "," + format_fixed(snr_db) + "," +
                     format_fixed(*result.best.fitness) + "," +
                     result.best.subset.to_string() + "\n";
    }
    write_text_file(r.out_dir / "aggregate.csv", aggregate);
}

void cmd_sweep_snr(const fs::path& spec_path, const RunOptions& options) {
    Resolved r = resolve(spec_path, options);
    std::vector<RealizationBatch> batches = make_batches(r);
    std::vector<Cell> cells = enumerate_cells(r);
    std::vector<std::optional<GaResult>> results(cells.size());
    parallel_for(cells.size(), r.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        results[i] = run_on_batch(
            batches[static_cast<std::size_t>(cell.rep)],
            cell_config(r, cell, r.spec.ga.mutation_strategy),
            Snr::from_db(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)]));
    });

    write_common(r, "sweep-snr");
    // cells are ordered nt > snr > rep, so replicates of a cell are adjacent
    std::string sweep = "n_t,snr_db,capacity\n";
    std::size_t i = 0;
    for (int n_t : r.spec.nt_grid) {
        for (double snr_db : r.spec.snr_grid) {
            double sum = 0.0;
            for (int rep = 0; rep < r.spec.repetitions; ++rep, ++i) {
                sum += *results[i]->best.fitness;
            }
            sweep += std::to_string(n_t) + "," + format_fixed(snr_db) + "," +
                     format_fixed(sum / r.spec.repetitions) + "\n";
        }
    }
    write_text_file(r.out_dir / "sweep.csv", sweep);
}

void cmd_convergence(const fs::path& spec_path, const RunOptions& options) {
    Resolved r = resolve(spec_path, options);
    std::vector<RealizationBatch> batches = make_batches(r);
    std::vector<Cell> cells = enumerate_cells(r);
    // two work items per cell: [2i] adaptive, [2i+1] plain, same batch + seed
    std::vector<std::optional<GaResult>> results(cells.size() * 2);
    parallel_for(results.size(), r.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i / 2];
        MutationStrategy strategy =
            (i % 2 == 0) ? MutationStrategy::adaptive : MutationStrategy::plain;
        results[i] = run_on_batch(
            batches[static_cast<std::size_t>(cell.rep)], cell_config(r, cell, strategy),
            Snr::from_db(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)]));
    });

    write_common(r, "convergence");
    std::string long_csv =
        "n_t,snr_db,replicate,strategy,generation,evaluations,best_fitness,mean_fitness,"
        "best_subset\n";
    std::string summary_csv =
        "n_t,snr_db,replicate,adaptive_generations_to_final,plain_generations_to_final\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        int n_t = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
        double snr_db = r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)];
        std::string cell_name = cell_dir_name(n_t, snr_db);
        fs::create_directories(r.out_dir / "traces" / cell_name);
        const GaResult& adaptive = *results[2 * i];
        const GaResult& plain = *results[2 * i + 1];
        struct Labeled {
            const GaResult* result;
            const char* name;
        };
        for (const Labeled& labeled :
             {Labeled{&adaptive, "adaptive"}, Labeled{&plain, "plain"}}) {
            std::string rep_name =
                "rep" + std::to_string(cell.rep) + "_" + labeled.name + ".csv";
            write_text_file(r.out_dir / "traces" / cell_name / rep_name,
                            trace_to_string(labeled.result->trace));
            for (const TraceRow& row : labeled.result->trace.per_generation) {
                long_csv += std::to_string(n_t) + "," + format_fixed(snr_db) + "," +
                            std::to_string(cell.rep) + "," + labeled.name + "," +
                            std::to_string(row.generation) + "," +
                            std::to_string(row.evaluations) + "," +
                            format_fixed(row.best_fitness) + "," +
                            format_fixed(row.mean_fitness) + "," +
                            row.best_subset.to_string() + "\n";
            }
        }
        summary_csv += std::to_string(n_t) + "," + format_fixed(snr_db) + "," +
                       std::to_string(cell.rep) + "," +
                       std::to_string(generations_to_final(adaptive.trace)) + "," +
                       std::to_string(generations_to_final(plain.trace)) + "\n";
    }
    write_text_file(r.out_dir / "convergence.csv", long_csv);
    write_text_file(r.out_dir / "summary.csv", summary_csv);

    // one human-readable line per (n_t, snr) cell, medians over replicates
    std::size_t i = 0;
    for (int n_t : r.spec.nt_grid) {
        for (double snr_db : r.spec.snr_grid) {
            std::vector<int> adaptive_gens;
            std::vector<int> plain_gens;
            for (int rep = 0; rep < r.spec.repetitions; ++rep, ++i) {
                adaptive_gens.push_back(generations_to_final(results[2 * i]->trace));
                plain_gens.push_back(generations_to_final(results[2 * i + 1]->trace));
            }
            std::cout << "n_t=" << n_t << " snr=" << format_compact(snr_db)
                      << "dB: adaptive reached its final best by generation "
                      << format_compact(median_of_ints(adaptive_gens)) << ", plain by "
                      << format_compact(median_of_ints(plain_gens)) << " (median over "
                      << r.spec.repetitions << " replicate"
                      << (r.spec.repetitions == 1 ? "" : "s") << ")\n";
        }
    }
}

void cmd_compare(const fs::path& spec_path, const RunOptions& options) {
    Resolved r = resolve(spec_path, options);
    std::vector<RealizationBatch> batches = make_batches(r);
    std::vector<Cell> cells = enumerate_cells(r);
    struct CompareOut {
        GaResult adaptive;
        GaResult plain;
        std::optional<double> oracle_capacity;
    };
    std::vector<std::optional<CompareOut>> results(cells.size());
    parallel_for(cells.size(), r.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const RealizationBatch& batch = batches[static_cast<std::size_t>(cell.rep)];
        Snr snr = Snr::from_db(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)]);
        int n_t = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
        GaResult adaptive =
            run_on_batch(batch, cell_config(r, cell, MutationStrategy::adaptive), snr);
        GaResult plain =
            run_on_batch(batch, cell_config(r, cell, MutationStrategy::plain), snr);
        std::optional<double> oracle_capacity;
        if (subset_count(r.spec.channel.n_tx, n_t) <= r.oracle_budget) {
            OracleOptions oracle_options;
            oracle_options.budget = r.oracle_budget;
            oracle_capacity = exhaustive_search(batch, n_t, snr, oracle_options).best_capacity;
        }
        results[i] = CompareOut{std::move(adaptive), std::move(plain), oracle_capacity};
    });

    write_common(r, "compare");
    std::string compare =
        "n_t,snr_db,selected_adaptive,capacity_adaptive,selected_plain,capacity_plain,"
        "oracle_capacity,gap_adaptive,gap_plain\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        const CompareOut& out = *results[i];
        int n_t = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
        double snr_db = r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)];
        double cap_adaptive = *out.adaptive.best.fitness;
        double cap_plain = *out.plain.best.fitness;
        compare += std::to_string(n_t) + "," + format_fixed(snr_db) + "," +
                   out.adaptive.best.subset.to_string() + "," + format_fixed(cap_adaptive) +
                   "," + out.plain.best.subset.to_string() + "," + format_fixed(cap_plain);
        if (out.oracle_capacity) {
            compare += "," + format_fixed(*out.oracle_capacity) + "," +
                       format_fixed(*out.oracle_capacity - cap_adaptive) + "," +
                       format_fixed(*out.oracle_capacity - cap_plain);
        } else {
            compare += ",,,";
        }
        compare += "\n";
    }
    write_text_file(r.out_dir / "compare.csv", compare);
}

void cmd_oracle(const fs::path& spec_path, const RunOptions& options) {
    Resolved r = resolve(spec_path, options);
    // check the whole grid before producing any output
    for (int n_t : r.spec.nt_grid) {
        long long total = subset_count(r.spec.channel.n_tx, n_t);
        if (total > r.oracle_budget) {
            throw BudgetError("oracle: C(" + std::to_string(r.spec.channel.n_tx) + ", " +
                              std::to_string(n_t) + ") = " + std::to_string(total) +
                              " subsets exceeds budget " + std::to_string(r.oracle_budget));
        }
    }
    std::vector<RealizationBatch> batches = make_batches(r);
    std::vector<Cell> cells = enumerate_cells(r);
    std::vector<std::optional<OracleResult>> results(cells.size());
    parallel_for(cells.size(), r.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        OracleOptions oracle_options;
        oracle_options.budget = r.oracle_budget;
        oracle_options.keep_ranked = true;
        results[i] = exhaustive_search(
            batches[static_cast<std::size_t>(cell.rep)],
            r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)],
            Snr::from_db(r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)]),
            oracle_options);
    });

    write_common(r, "oracle");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        const OracleResult& result = *results[i];
        int n_t = r.spec.nt_grid[static_cast<std::size_t>(cell.nt_idx)];
        double snr_db = r.spec.snr_grid[static_cast<std::size_t>(cell.snr_idx)];
        std::string cell_name = cell_dir_name(n_t, snr_db);
        fs::create_directories(r.out_dir / "oracle" / cell_name);
        std::string rep_name = "rep" + std::to_string(cell.rep);
        nlohmann::json j = result.to_json();
        j["n_t"] = n_t;
        j["snr_db"] = round_to(snr_db);
        j["replicate"] = cell.rep;
        j["seed"] = seed_for_rep(r, cell.rep);
        write_text_file(r.out_dir / "oracle" / cell_name / (rep_name + ".json"),
                        j.dump(2) + "\n");
        std::ostringstream ranked;
        result.write_ranked_csv(ranked);
        write_text_file(r.out_dir / "oracle" / cell_name / (rep_name + "_ranked.csv"),
                        ranked.str());
    }
}

}  // namespace antsel
