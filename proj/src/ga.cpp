#include "antsel/ga.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "antsel/errors.hpp"
#include "antsel/io.hpp"

namespace antsel {

namespace {

std::string mask_key(const AntennaSubset& subset) {
    const auto& mask = subset.mask();
    std::string key(mask.size(), '0');
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            key[i] = '1';
        }
    }
    return key;
}

int require_int(const nlohmann::json& j, const char* key, int fallback, bool required) {
    if (!j.contains(key)) {
        if (required) {
            throw ConfigError(std::string("ga config: missing key '") + key + "'");
        }
        return fallback;
    }
    if (!j.at(key).is_number_integer()) {
        throw ConfigError(std::string("ga config: '") + key + "' must be an integer");
    }
    return j.at(key).get<int>();
}

}  // namespace

std::string to_string(MutationStrategy strategy) {
    return strategy == MutationStrategy::plain ? "plain" : "adaptive";
}

std::string to_string(AdaptivePartnerMode mode) {
    return mode == AdaptivePartnerMode::random_zero ? "random_zero" : "best_swap";
}

MutationStrategy mutation_strategy_from_string(const std::string& name) {
    if (name == "plain") {
        return MutationStrategy::plain;
    }
    if (name == "adaptive") {
        return MutationStrategy::adaptive;
    }
    throw ConfigError("ga config: unknown mutation_strategy '" + name + "'");
}

AdaptivePartnerMode partner_mode_from_string(const std::string& name) {
    if (name == "random_zero") {
        return AdaptivePartnerMode::random_zero;
    }
    if (name == "best_swap") {
        return AdaptivePartnerMode::best_swap;
    }
    throw ConfigError("ga config: unknown adaptive_partner_mode '" + name + "'");
}

void GaConfig::validate(int n_tx) const {
    if (population_size < 2 || population_size % 2 != 0) {
        throw ConfigError("ga config: population_size must be even and at least 2");
    }
    if (subset_size < 1 || subset_size > n_tx) {
        throw ConfigError("ga config: subset_size must lie in [1, n_tx]");
    }
    if (crossover_rate < 0.0 || crossover_rate > 1.0) {
        throw ConfigError("ga config: crossover_rate must lie in [0, 1]");
    }
    if (max_generations < 1) {
        throw ConfigError("ga config: max_generations must be at least 1");
    }
    if (fitness_batch_size < 1) {
        throw ConfigError("ga config: fitness_batch_size must be at least 1");
    }
}

GaConfig GaConfig::from_json(const nlohmann::json& j, bool require_subset_size) {
    if (!j.is_object()) {
        throw ConfigError("ga config: expected a JSON object");
    }
    static const char* known[] = {"population_size",  "subset_size",
                                  "crossover_rate",   "max_generations",
                                  "mutation_strategy", "adaptive_partner_mode",
                                  "seed",             "fitness_batch_size"};
    for (const auto& item : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                return item.key() == k;
            }) == std::end(known)) {
            throw ConfigError("ga config: unknown key '" + item.key() + "'");
        }
    }

    GaConfig config;
    config.population_size = require_int(j, "population_size", config.population_size, false);
    config.subset_size = require_int(j, "subset_size", config.subset_size, require_subset_size);
    config.max_generations = require_int(j, "max_generations", config.max_generations, false);
    config.fitness_batch_size =
        require_int(j, "fitness_batch_size", config.fitness_batch_size, false);
    if (j.contains("crossover_rate")) {
        if (!j.at("crossover_rate").is_number()) {
            throw ConfigError("ga config: 'crossover_rate' must be a number");
        }
        config.crossover_rate = j.at("crossover_rate").get<double>();
    }
    if (j.contains("mutation_strategy")) {
        if (!j.at("mutation_strategy").is_string()) {
            throw ConfigError("ga config: 'mutation_strategy' must be a string");
        }
        config.mutation_strategy =
            mutation_strategy_from_string(j.at("mutation_strategy").get<std::string>());
    }
    if (j.contains("adaptive_partner_mode")) {
        if (!j.at("adaptive_partner_mode").is_string()) {
            throw ConfigError("ga config: 'adaptive_partner_mode' must be a string");
        }
        config.adaptive_partner_mode =
            partner_mode_from_string(j.at("adaptive_partner_mode").get<std::string>());
    }
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_integer() ||
            (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
            throw ConfigError("ga config: 'seed' must be a non-negative integer");
        }
        config.seed = s.get<std::uint64_t>();
    }
    return config;
}

nlohmann::json GaConfig::to_json() const {
    return nlohmann::json{{"population_size", population_size},
                          {"subset_size", subset_size},
                          {"crossover_rate", crossover_rate},
                          {"max_generations", max_generations},
                          {"mutation_strategy", to_string(mutation_strategy)},
                          {"adaptive_partner_mode", to_string(adaptive_partner_mode)},
                          {"seed", seed},
                          {"fitness_batch_size", fitness_batch_size}};
}

void RunTrace::write_csv(std::ostream& os) const {
    os << "generation,best_fitness,mean_fitness,best_subset\n";
    for (const auto& row : per_generation) {
        os << row.generation << ',' << format_fixed(row.best_fitness) << ','
           << format_fixed(row.mean_fitness) << ',' << row.best_subset.to_string() << '\n';
    }
}

FitnessEvaluator::FitnessEvaluator(const RealizationBatch& batch, const Snr& snr)
    : batch_(batch), snr_(snr) {
    if (batch.size() < 1) {
        throw ConfigError("fitness evaluator: batch is empty");
    }
}

void FitnessEvaluator::set_observer(std::function<void(const AntennaSubset&)> observer) {
    observer_ = std::move(observer);
}

double FitnessEvaluator::evaluate(Chromosome& chromosome) {
    if (chromosome.fitness) {
        return *chromosome.fitness;
    }
    ++evaluations_;
    if (observer_) {
        observer_(chromosome.subset);
    }
    std::string key = mask_key(chromosome.subset);
    auto found = cache_.find(key);
    if (found != cache_.end()) {
        ++cache_hits_;
        chromosome.fitness = found->second;
        return found->second;
    }
    double value = evaluate_fitness(chromosome, batch_, snr_);
    cache_.emplace(std::move(key), value);
    return value;
}

double evaluate_fitness(Chromosome& chromosome, const RealizationBatch& batch,
                        const Snr& snr) {
    if (chromosome.fitness) {
        return *chromosome.fitness;
    }
    double value = ergodic_capacity(batch, chromosome.subset, snr).bits_per_s_per_hz;
    chromosome.fitness = value;
    return value;
}

std::vector<Chromosome> init_population(const GaConfig& config, int n_tx, Rng& rng) {
    config.validate(n_tx);
    std::vector<Chromosome> population;
    population.reserve(static_cast<std::size_t>(config.population_size));
    std::vector<int> indices(static_cast<std::size_t>(n_tx));
    for (int k = 0; k < config.population_size; ++k) {
        std::iota(indices.begin(), indices.end(), 0);
        // partial Fisher-Yates: the first subset_size entries are a uniform
        // draw without replacement
        for (int i = 0; i < config.subset_size; ++i) {
            std::size_t j = static_cast<std::size_t>(i) +
                            rng.uniform_index(static_cast<std::size_t>(n_tx - i));
            std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
        }
        std::vector<int> chosen(indices.begin(), indices.begin() + config.subset_size);
        population.push_back(
            Chromosome{AntennaSubset::from_positions(n_tx, std::move(chosen)), std::nullopt});
    }
    return population;
}

std::pair<std::vector<bool>, std::vector<bool>> crossover_masks(
    const std::vector<bool>& parent_a, const std::vector<bool>& parent_b, int cut) {
    if (parent_a.size() != parent_b.size()) {
        throw DimensionError("crossover: parents must share n_tx");
    }
    const int n = static_cast<int>(parent_a.size());
    if (cut < 1 || cut >= n) {
        throw ConfigError("crossover: cut must lie in [1, n_tx-1]");
    }
    std::vector<bool> child_a = parent_a;
    std::vector<bool> child_b = parent_b;
    for (int i = cut; i < n; ++i) {
        child_a[static_cast<std::size_t>(i)] = parent_b[static_cast<std::size_t>(i)];
        child_b[static_cast<std::size_t>(i)] = parent_a[static_cast<std::size_t>(i)];
    }
    return {std::move(child_a), std::move(child_b)};
}

std::vector<bool> repair_mask(std::vector<bool> mask, int n_t, Rng& rng) {
    const int n = static_cast<int>(mask.size());
    if (n_t < 1 || n_t > n) {
        throw ConfigError("repair: target cardinality must lie in [1, n_tx]");
    }
    auto positions_of = [&mask](bool bit) {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
            if (mask[static_cast<std::size_t>(i)] == bit) {
                out.push_back(i);
            }
        }
        return out;
    };
    int count = static_cast<int>(std::count(mask.begin(), mask.end(), true));
    while (count > n_t) {
        auto ones = positions_of(true);
        mask[static_cast<std::size_t>(ones[rng.uniform_index(ones.size())])] = false;
        --count;
    }
    while (count < n_t) {
        auto zeros = positions_of(false);
        mask[static_cast<std::size_t>(zeros[rng.uniform_index(zeros.size())])] = true;
        ++count;
    }
    return mask;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent_a,
                                            const Chromosome& parent_b,
                                            const GaConfig& config, Rng& rng) {
    const auto& mask_a = parent_a.subset.mask();
    const auto& mask_b = parent_b.subset.mask();
    if (mask_a.size() != mask_b.size()) {
        throw DimensionError("crossover: parents must share n_tx");
    }
    const int n = static_cast<int>(mask_a.size());
    std::vector<bool> child_a = mask_a;
    std::vector<bool> child_b = mask_b;
    if (n >= 2 && rng.uniform_real() < config.crossover_rate) {
        int cut = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n - 1)));
        std::tie(child_a, child_b) = crossover_masks(mask_a, mask_b, cut);
    }
    child_a = repair_mask(std::move(child_a), config.subset_size, rng);
    child_b = repair_mask(std::move(child_b), config.subset_size, rng);
    return {Chromosome{AntennaSubset(std::move(child_a)), std::nullopt},
            Chromosome{AntennaSubset(std::move(child_b)), std::nullopt}};
}

Chromosome repair_cardinality(const Chromosome& chromosome, int n_t, Rng& rng) {
    std::vector<bool> repaired = repair_mask(chromosome.subset.mask(), n_t, rng);
    if (repaired == chromosome.subset.mask()) {
        return chromosome;  // identity: same individual, cached fitness still valid
    }
    return Chromosome{AntennaSubset(std::move(repaired)), std::nullopt};
}

MutationPointSet feasible_points(const Chromosome& chromosome) {
    return MutationPointSet{chromosome.subset.positions(), chromosome.subset.count()};
}

Chromosome plain_mutation(const Chromosome& chromosome, const GaConfig& config, Rng& rng) {
    (void)config;
    const auto& mask = chromosome.subset.mask();
    const auto& ones = chromosome.subset.positions();
    std::vector<int> zeros;
    for (int i = 0; i < chromosome.subset.n_tx(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) {
            zeros.push_back(i);
        }
    }
    if (zeros.empty()) {
        return chromosome;  // full selection: no cardinality-preserving swap exists
    }
    int one_pos = ones[rng.uniform_index(ones.size())];
    int zero_pos = zeros[rng.uniform_index(zeros.size())];
    std::vector<bool> mutated = mask;
    mutated[static_cast<std::size_t>(one_pos)] = false;
    mutated[static_cast<std::size_t>(zero_pos)] = true;
    return Chromosome{AntennaSubset(std::move(mutated)), std::nullopt};
}

Chromosome adaptive_mutation(const Chromosome& chromosome, FitnessEvaluator& fitness,
                             const GaConfig& config, Rng& rng) {
    Chromosome original = chromosome;
    fitness.evaluate(original);

    const auto& mask = original.subset.mask();
    const auto& ones = original.subset.positions();
    std::vector<int> zeros;
    for (int i = 0; i < original.subset.n_tx(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) {
            zeros.push_back(i);
        }
    }
    if (zeros.empty()) {
        return original;  // no legal move
    }

    bool have_candidate = false;
    double best_value = 0.0;
    Chromosome best_candidate = original;
    auto consider = [&](int point, int partner) {
        std::vector<bool> moved = mask;
        moved[static_cast<std::size_t>(point)] = false;
        moved[static_cast<std::size_t>(partner)] = true;
        Chromosome candidate{AntennaSubset(std::move(moved)), std::nullopt};
        double value = fitness.evaluate(candidate);
        // strict comparison keeps the earliest (point, partner) on ties;
        // points and partners are visited in ascending order
        if (!have_candidate || value > best_value) {
            have_candidate = true;
            best_value = value;
            best_candidate = std::move(candidate);
        }
    };
    for (int point : ones) {
        if (config.adaptive_partner_mode == AdaptivePartnerMode::random_zero) {
            consider(point, zeros[rng.uniform_index(zeros.size())]);
        } else {
            for (int partner : zeros) {
                consider(point, partner);
            }
        }
    }
    // the original survives only by strictly beating every candidate
    if (have_candidate && best_value >= *original.fitness) {
        return best_candidate;
    }
    return original;
}

Chromosome adaptive_mutation(const Chromosome& chromosome, const RealizationBatch& batch,
                             const Snr& snr, const GaConfig& config, Rng& rng) {
    FitnessEvaluator fitness(batch, snr);
    return adaptive_mutation(chromosome, fitness, config, rng);
}

std::vector<Chromosome> select_next_generation(const std::vector<Chromosome>& parents,
                                               const std::vector<Chromosome>& children,
                                               const GaConfig& config) {
    std::vector<const Chromosome*> pool;
    pool.reserve(parents.size() + children.size());
    for (const auto& p : parents) {
        pool.push_back(&p);
    }
    for (const auto& c : children) {
        pool.push_back(&c);
    }
    for (const Chromosome* member : pool) {
        if (!member->fitness) {
            throw std::logic_error("select_next_generation: unevaluated chromosome in pool");
        }
    }
    if (static_cast<int>(pool.size()) < config.population_size) {
        throw ConfigError("select_next_generation: pool smaller than population_size");
    }
    // stable sort keeps pool order on ties: parents before children, then
    // lower index within each group
    std::stable_sort(pool.begin(), pool.end(), [](const Chromosome* a, const Chromosome* b) {
        return *a->fitness > *b->fitness;
    });
    std::vector<Chromosome> next;
    next.reserve(static_cast<std::size_t>(config.population_size));
    for (int i = 0; i < config.population_size; ++i) {
        next.push_back(*pool[static_cast<std::size_t>(i)]);
    }
    return next;
}

GaResult run_on_batch(const RealizationBatch& batch, const GaConfig& config,
                      const Snr& snr,
                      std::function<void(const AntennaSubset&)> observer) {
    batch.config.validate();
    config.validate(batch.config.n_tx);

    FitnessEvaluator fitness(batch, snr);
    if (observer) {
        fitness.set_observer(std::move(observer));
    }
    Rng rng(config.seed);

    std::vector<Chromosome> population = init_population(config, batch.config.n_tx, rng);
    for (auto& member : population) {
        fitness.evaluate(member);
    }

    RunTrace trace;
    trace.per_generation.reserve(static_cast<std::size_t>(config.max_generations));
    for (int generation = 1; generation <= config.max_generations; ++generation) {
        // parents pair up as adjacent entries of a uniform shuffle
        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }

        std::vector<Chromosome> children;
        children.reserve(population.size());
        for (std::size_t k = 0; k + 1 < order.size(); k += 2) {
            auto pair = crossover(population[order[k]], population[order[k + 1]], config, rng);
            children.push_back(std::move(pair.first));
            children.push_back(std::move(pair.second));
        }

        for (auto& child : children) {
            if (config.mutation_strategy == MutationStrategy::plain) {
                child = plain_mutation(child, config, rng);
                fitness.evaluate(child);
            } else {
                fitness.evaluate(child);
                child = adaptive_mutation(child, fitness, config, rng);
            }
        }

        population = select_next_generation(population, children, config);

        double mean = 0.0;
        for (const auto& member : population) {
            mean += *member.fitness;
        }
        mean /= static_cast<double>(population.size());
        trace.per_generation.push_back(TraceRow{generation, *population.front().fitness, mean,
                                                population.front().subset,
                                                fitness.evaluations()});
    }

    trace.evaluations = fitness.evaluations();
    trace.cache_hits = fitness.cache_hits();
    // elitist selection makes the final front runner the best ever observed
    return GaResult{population.front(), std::move(trace)};
}

GaResult run(const ChannelConfig& channel_config, const GaConfig& config, const Snr& snr) {
    RealizationBatch batch =
        generate_batch(channel_config, config.fitness_batch_size, channel_config.seed);
    return run_on_batch(batch, config, snr);
}

}  // namespace antsel
