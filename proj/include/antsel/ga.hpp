#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "antsel/capacity.hpp"
#include "antsel/channel.hpp"
#include "antsel/rng.hpp"

namespace antsel {

enum class MutationStrategy { plain, adaptive };
enum class AdaptivePartnerMode { random_zero, best_swap };

std::string to_string(MutationStrategy strategy);
std::string to_string(AdaptivePartnerMode mode);
MutationStrategy mutation_strategy_from_string(const std::string& name);
AdaptivePartnerMode partner_mode_from_string(const std::string& name);

/// Genetic-algorithm parameters. subset_size is the enforced number of
/// selected antennas; the population is kept even so parents pair exactly.
struct GaConfig {
    int population_size = 20;
    int subset_size = 0;
    double crossover_rate = 0.5;
    int max_generations = 30;
    MutationStrategy mutation_strategy = MutationStrategy::adaptive;
    AdaptivePartnerMode adaptive_partner_mode = AdaptivePartnerMode::best_swap;
    std::uint64_t seed = 1;
    int fitness_batch_size = 100;

    /// Throws ConfigError on invalid values; n_tx bounds subset_size.
    void validate(int n_tx) const;

    /// Reads the JSON form. Absent keys keep the defaults above;
    /// subset_size is required unless require_subset_size is false (the
    /// experiment grid supplies it per cell).
    static GaConfig from_json(const nlohmann::json& j, bool require_subset_size = true);
    nlohmann::json to_json() const;
};

/// One candidate solution: a subset plus its cached fitness (absent until
/// evaluated against the run's batch).
struct Chromosome {
    AntennaSubset subset;
    std::optional<double> fitness;
};

/// The gene positions eligible for mutation: exactly the selected antennas.
struct MutationPointSet {
    std::vector<int> feasible_points;
    int count = 0;
};

struct TraceRow {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    AntennaSubset best_subset;
    long long evaluations = 0;  ///< cumulative fitness requests at row end
};

/// Per-generation convergence record of one GA run: one row per completed
/// generation (1..max_generations). Best fitness is non-decreasing across
/// rows because selection is elitist.
struct RunTrace {
    std::vector<TraceRow> per_generation;
    long long evaluations = 0;  ///< fitness requests, cache hits included
    long long cache_hits = 0;   ///< requests answered by the mask cache

    /// CSV with columns generation,best_fitness,mean_fitness,best_subset.
    void write_csv(std::ostream& os) const;
};

/// Ergodic-capacity fitness bound to one shared batch and SNR, with a
/// per-run mask cache. Every chromosome in a run is scored against the same
/// realizations, so fitness is a pure function of the mask and repeated masks
/// are served from the cache. Evaluation requests and cache hits are counted
/// separately; a chromosome that already carries a fitness value is not a
/// request.
class FitnessEvaluator {
public:
    FitnessEvaluator(const RealizationBatch& batch, const Snr& snr);

    /// Scores the chromosome and caches the value onto it.
    double evaluate(Chromosome& chromosome);

    long long evaluations() const { return evaluations_; }
    long long cache_hits() const { return cache_hits_; }
    const RealizationBatch& batch() const { return batch_; }
    const Snr& snr() const { return snr_; }

    /// Invoked with every requested subset; used by invariant checks.
    void set_observer(std::function<void(const AntennaSubset&)> observer);

private:
    const RealizationBatch& batch_;
    Snr snr_;
    std::unordered_map<std::string, double> cache_;
    long long evaluations_ = 0;
    long long cache_hits_ = 0;
    std::function<void(const AntennaSubset&)> observer_;
};

/// population_size chromosomes, each with subset_size distinct antennas drawn
/// uniformly without replacement.
std::vector<Chromosome> init_population(const GaConfig& config, int n_tx, Rng& rng);

/// Scores one chromosome against a batch directly (no cache, no counters) and
/// stores the value onto it. FitnessEvaluator routes through the same
/// computation, so the two agree bit-for-bit on the same inputs.
double evaluate_fitness(Chromosome& chromosome, const RealizationBatch& batch,
                        const Snr& snr);

/// Raw single-point tail exchange at cut (first exchanged index, in
/// [1, n_tx-1]). May break cardinality; callers repair afterwards.
std::pair<std::vector<bool>, std::vector<bool>> crossover_masks(
    const std::vector<bool>& parent_a, const std::vector<bool>& parent_b, int cut);

/// Restores popcount n_t by flipping uniformly-chosen ones (or zeros) until
/// the count matches. Identity when the count is already n_t.
std::vector<bool> repair_mask(std::vector<bool> mask, int n_t, Rng& rng);

/// With probability crossover_rate exchanges the tails of the two parents at
/// a uniform cut; otherwise the children are copies. Both children are then
/// cardinality-repaired. Children never inherit cached fitness.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent_a,
                                            const Chromosome& parent_b,
                                            const GaConfig& config, Rng& rng);

/// Chromosome-level wrapper around repair_mask.
Chromosome repair_cardinality(const Chromosome& chromosome, int n_t, Rng& rng);

/// The positions of the chromosome's ones.
MutationPointSet feasible_points(const Chromosome& chromosome);

/// Swaps one uniformly-random selected antenna with one uniformly-random
/// unselected one; identity when every antenna is selected.
Chromosome plain_mutation(const Chromosome& chromosome, const GaConfig& config, Rng& rng);

/// Fitness-guided mutation: builds one cardinality-preserving candidate move
/// per feasible point (best_swap scores every unselected partner; random_zero
/// draws the partner), scores them all against the shared batch, and returns
/// the best candidate, or the original chromosome if it beats every
/// candidate. Ties break toward the lowest feasible point, then the lowest
/// partner index. The original is returned only when it strictly beats every
/// candidate; the chromosome is evaluated first if it carries no fitness.
Chromosome adaptive_mutation(const Chromosome& chromosome, FitnessEvaluator& fitness,
                             const GaConfig& config, Rng& rng);

/// Same move, scored through a throwaway evaluator on the given batch.
Chromosome adaptive_mutation(const Chromosome& chromosome, const RealizationBatch& batch,
                             const Snr& snr, const GaConfig& config, Rng& rng);

/// Elitist pool selection: the population_size best of parents + children,
/// sorted by fitness descending; ties prefer parents, then lower index.
std::vector<Chromosome> select_next_generation(const std::vector<Chromosome>& parents,
                                               const std::vector<Chromosome>& children,
                                               const GaConfig& config);

struct GaResult {
    Chromosome best;
    RunTrace trace;
};

/// Full optimization loop against an existing shared batch:
/// init -> evaluate -> [crossover -> mutate -> evaluate -> select] per
/// generation. Deterministic given (batch, config.seed). The optional
/// observer sees every requested subset.
GaResult run_on_batch(const RealizationBatch& batch, const GaConfig& config,
                      const Snr& snr,
                      std::function<void(const AntennaSubset&)> observer = {});

/// Convenience wrapper that generates the batch from
/// (channel_config, channel_config.seed) and config.fitness_batch_size.
GaResult run(const ChannelConfig& channel_config, const GaConfig& config, const Snr& snr);

}  // namespace antsel
