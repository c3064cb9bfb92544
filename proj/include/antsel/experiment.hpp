#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "antsel/channel.hpp"
#include "antsel/ga.hpp"

namespace antsel {

/// How replicate seeds derive from the base seed: per_replicate offsets the
/// base by the replicate index; fixed reuses the base for every replicate.
enum class SeedPolicy { per_replicate, fixed };

std::string to_string(SeedPolicy policy);
SeedPolicy seed_policy_from_string(const std::string& name);

/// Declarative description of one experiment: the channel, the optimizer,
/// the (n_t, snr) grid, and how many seeded replicates to run per cell.
/// channel.seed acts as the base seed; ga.subset_size is supplied per cell
/// from nt_grid and ga.seed per replicate from the seed policy.
struct ExperimentSpec {
    ChannelConfig channel;
    GaConfig ga;
    std::vector<double> snr_grid;  ///< dB
    std::vector<int> nt_grid;
    int repetitions = 1;
    std::string output_dir;
    SeedPolicy seed_policy = SeedPolicy::per_replicate;

    /// Throws ConfigError on empty grids, infeasible nt entries (named by
    /// index), repetitions < 1, or an empty output_dir.
    void validate() const;

    static ExperimentSpec from_json(const nlohmann::json& j);

    /// Reads and parses a spec file; parse failures carry the line number.
    static ExperimentSpec load(const std::filesystem::path& path);

    nlohmann::json to_json() const;
};

/// Command-line overrides applied on top of the spec file.
struct RunOptions {
    std::optional<std::string> out_override;       ///< --out
    std::optional<long long> oracle_budget;        ///< --oracle-budget
    std::optional<std::uint64_t> seed_override;    ///< ANTSEL_SEED
    int jobs = 1;                                  ///< --jobs
};

/// Runs the configured strategy on every (n_t, snr, replicate) cell. Writes
/// spec.json, aggregate.csv (n_t,snr_db,capacity,best_subset; one row per
/// replicate), runs/<cell>/rep<r>.json, traces/<cell>/rep<r>.csv, and a
/// metadata.json sidecar (the only file carrying timestamps).
void cmd_run(const std::filesystem::path& spec_path, const RunOptions& options = {});

/// Writes sweep.csv with one row per (n_t, snr) cell: the mean over
/// replicates of the selected subset's capacity.
void cmd_sweep_snr(const std::filesystem::path& spec_path, const RunOptions& options = {});

/// Runs adaptive and plain on the identical batch and seed per cell. Writes
/// convergence.csv (long format, one row per generation per strategy),
/// per-strategy trace files, and summary.csv with the generation at which
/// each strategy first reaches its final best value; prints one summary line
/// per cell.
void cmd_convergence(const std::filesystem::path& spec_path, const RunOptions& options = {});

/// Adaptive vs plain vs exhaustive oracle per cell, all on the shared batch.
/// Writes compare.csv; oracle columns are empty when C(n_tx, n_t) exceeds
/// the budget.
void cmd_compare(const std::filesystem::path& spec_path, const RunOptions& options = {});

/// Exhaustive search per cell. Writes oracle/<cell>/rep<r>.json and a ranked
/// CSV of every subset. Refuses (before any output) if any cell exceeds the
/// budget.
void cmd_oracle(const std::filesystem::path& spec_path, const RunOptions& options = {});

}  // namespace antsel
