#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "antsel/capacity.hpp"
#include "antsel/channel.hpp"

namespace antsel {

/// One (subset, capacity) pair of the oracle's ranked output.
struct RankedEntry {
    AntennaSubset subset;
    double capacity = 0.0;
};

/// Ground truth for one (batch, n_t, snr) cell: the capacity-maximizing
/// subset over all C(n_tx, n_t) candidates.
struct OracleResult {
    AntennaSubset best_subset;
    double best_capacity = 0.0;
    long long subsets_evaluated = 0;
    std::optional<std::vector<RankedEntry>> ranked;  ///< descending capacity

    nlohmann::json to_json() const;

    /// CSV with columns subset,capacity. Requires ranked to be present.
    void write_ranked_csv(std::ostream& os) const;
};

struct OracleOptions {
    long long budget = 1000000;  ///< refuse cells with more subsets than this
    bool keep_ranked = false;
};

/// C(n, k), saturating at LLONG_MAX instead of overflowing.
long long subset_count(int n, int k);

/// Evaluates every n_t-subset on the shared batch, in lexicographic position
/// order, and returns the maximizer (lexicographically first on exact ties).
/// Throws BudgetError naming C(n_tx, n_t) when the count exceeds the budget.
OracleResult exhaustive_search(const RealizationBatch& batch, int n_t, const Snr& snr,
                               const OracleOptions& options = {});

}  // namespace antsel
