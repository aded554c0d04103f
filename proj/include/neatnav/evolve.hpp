#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "neatnav/genome.hpp"

namespace neatnav {

struct Species {
    int id = 0;
    Genome representative;
    std::vector<std::size_t> members;  // indices into the population
    double best_fitness_ever = -std::numeric_limits<double>::infinity();
    int generations_since_improvement = 0;
};

/// Mutation parameters that replace the defaults for generations [first, last].
struct ScheduleEntry {
    int first = 0;
    int last = 0;
    MutationParams params;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct EvolveParams {
    int pop_size = 100;
    int elitism = 2;
    double fitness_threshold = 5000.0;
    bool stop_at_threshold = true;
    double compatibility_threshold = 3.0;
    CompatibilityCoefficients compatibility{};
    double survival_fraction = 0.2;
    int species_max_stagnation = 15;
    int reinjection_period = 100;  // 0 disables
    int reinjection_count = 5;
    bool reset_on_extinction = false;
    MutationParams mutation{};
    std::vector<ScheduleEntry> mutation_schedule;

    /// Parameters in force at `generation`; later schedule entries win.
    const MutationParams& mutation_at(int generation) const;
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    int species_count = 0;
    Genome champion;
    bool reinjected = false;
    // What the mutation operators attempted while breeding this generation.
    MutationLog mutations;

    std::size_t champion_nodes() const { return champion.nodes.size(); }
    std::size_t champion_connections() const { return champion.enabled_count(); }
};

/// Assigns every genome to the first species (previous ones first, then ones
/// founded this call) whose representative lies within `threshold`. Species
/// left empty are dropped; survivors get a representative sampled from
/// their members.
void speciate(std::span<const Genome> population, std::vector<Species>& species, double threshold,
              int& next_species_id, Random& rng,
              const CompatibilityCoefficients& coeffs = {});

/// Largest-remainder split of `slots` in proportion to `weights`; ties go to
/// the lower `ids` value. Equal split when every weight is zero.
std::vector<int> offspring_quotas(std::span<const double> weights, std::span<const int> ids, int slots);

/// Per-species summed adjusted fitness after shifting by the population minimum.
std::vector<double> shared_fitness(std::span<const Species> species, std::span<const Genome> population);

/// Updates best_fitness_ever / stagnation counters from member fitness.
void update_stagnation(std::vector<Species>& species, std::span<const Genome> population);

/// Drops stagnant species except the one holding the population champion.
void remove_stagnant(std::vector<Species>& species, std::span<const Genome> population,
                     int max_stagnation);

/// Next generation of exactly params.pop_size genomes. Every member must carry a fitness.
std::vector<Genome> reproduce(std::vector<Species>& species, std::span<const Genome> population,
                              const EvolveParams& params, const MutationParams& mutation,
                              InnovationRegistry& registry, Random& rng, MutationLog* log = nullptr);

/// Replaces the `count` lowest-fitness genomes with fresh minimal ones (fitness unset).
/// Returns the replaced indices in ascending order.
std::vector<std::size_t> reinject_diversity(std::vector<Genome>& population, int count,
                                            InnovationRegistry& registry, Random& rng,
                                            WeightRange range = {});

inline constexpr int kTransferClones = 20;

/// kTransferClones exact clones; the rest are clones mutated once. Throws
/// DimensionError when the champion does not match (n_inputs, n_outputs).
std::vector<Genome> seed_from_champion(const Genome& champion, int pop_size, int n_inputs,
                                       int n_outputs, const MutationParams& params,
                                       InnovationRegistry& registry, Random& rng);

/// Fitness for every genome in order; `generation` lets the caller derive seeds.
using PopulationEvaluator =
    std::function<std::vector<double>(std::span<const Genome> genomes, int generation)>;

struct RunOptions {
    int n_inputs = 0;
    int n_outputs = 2;
    // Generation-0 population; random minimal genomes when empty.
    std::vector<Genome> initial_population;
    // Called after each generation is evaluated; receives the evaluated population.
    std::function<void(const GenerationStats&, std::span<const Genome>)> on_generation;
};

struct RunResult {
    Genome champion;
    std::vector<GenerationStats> history;
    InnovationRegistry registry;
};

RunResult run_evolution(const PopulationEvaluator& evaluator, const EvolveParams& params,
                        int n_generations, std::uint64_t master_seed, RunOptions options);

}  // namespace neatnav
