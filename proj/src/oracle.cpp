#include "antsel/oracle.hpp"

#include <algorithm>
#include <climits>
#include <string>

#include "antsel/errors.hpp"
#include "antsel/io.hpp"

namespace antsel {

nlohmann::json OracleResult::to_json() const {
    return nlohmann::json{{"best_subset", best_subset.positions()},
                          {"best_capacity", round_to(best_capacity)},
                          {"subsets_evaluated", subsets_evaluated}};
}

void OracleResult::write_ranked_csv(std::ostream& os) const {
    if (!ranked) {
        throw ConfigError("oracle result: ranked list was not kept");
    }
    os << "subset,capacity\n";
    for (const auto& entry : *ranked) {
        os << entry.subset.to_string() << ',' << format_fixed(entry.capacity) << '\n';
    }
}

long long subset_count(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    unsigned long long result = 1;
    for (int i = 1; i <= k; ++i) {
        // multiply before divide keeps the intermediate integral; check the
        // multiply against the 63-bit ceiling first
        unsigned long long factor = static_cast<unsigned long long>(n - k + i);
        if (result > static_cast<unsigned long long>(LLONG_MAX) / factor) {
            return LLONG_MAX;
        }
        result = result * factor / static_cast<unsigned long long>(i);
    }
    return static_cast<long long>(result);
}

OracleResult exhaustive_search(const RealizationBatch& batch, int n_t, const Snr& snr,
                               const OracleOptions& options) {
    batch.config.validate();
    if (batch.size() < 1) {
        throw ConfigError("oracle: batch is empty");
    }
    const int n_tx = batch.config.n_tx;
    if (n_t < 1 || n_t > n_tx) {
        throw ConfigError("oracle: n_t must lie in [1, n_tx]");
    }
    const long long total = subset_count(n_tx, n_t);
    if (total > options.budget) {
        throw BudgetError("oracle: C(" + std::to_string(n_tx) + ", " + std::to_string(n_t) +
                          ") = " + std::to_string(total) + " subsets exceeds budget " +
                          std::to_string(options.budget));
    }

    std::vector<int> positions(static_cast<std::size_t>(n_t));
    for (int i = 0; i < n_t; ++i) {
        positions[static_cast<std::size_t>(i)] = i;
    }

    std::optional<AntennaSubset> best;
    double best_capacity = 0.0;
    long long evaluated = 0;
    std::vector<RankedEntry> ranked;
    if (options.keep_ranked) {
        ranked.reserve(static_cast<std::size_t>(total));
    }

    while (true) {
        AntennaSubset subset = AntennaSubset::from_positions(n_tx, positions);
        double capacity = ergodic_capacity(batch, subset, snr).bits_per_s_per_hz;
        ++evaluated;
        if (options.keep_ranked) {
            ranked.push_back(RankedEntry{subset, capacity});
        }
        // strict comparison keeps the lexicographically first maximizer
        if (!best || capacity > best_capacity) {
            best = std::move(subset);
            best_capacity = capacity;
        }

        // advance to the next combination in lexicographic order
        int i = n_t - 1;
        while (i >= 0 && positions[static_cast<std::size_t>(i)] == n_tx - n_t + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++positions[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n_t; ++j) {
            positions[static_cast<std::size_t>(j)] = positions[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    OracleResult result{*best, best_capacity, evaluated, std::nullopt};
    if (options.keep_ranked) {
        // stable sort keeps equal-capacity entries in enumeration order
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const RankedEntry& a, const RankedEntry& b) {
                             return a.capacity > b.capacity;
                         });
        result.ranked = std::move(ranked);
    }
    return result;
}

}  // namespace antsel
