#include "neatnav/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "neatnav/errors.hpp"

namespace neatnav {

const MutationParams& EvolveParams::mutation_at(int generation) const {
    const MutationParams* p = &mutation;
    for (const auto& e : mutation_schedule)
        if (generation >= e.first && generation <= e.last) p = &e.params;
    return *p;
}

void EvolveParams::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (pop_size < 1) fail("pop_size must be positive");
    if (elitism < 0 || elitism > pop_size) fail("elitism must lie in [0, pop_size]");
    if (!(compatibility_threshold > 0.0)) fail("compatibility_threshold must be positive");
    if (!(survival_fraction > 0.0 && survival_fraction <= 1.0))
        fail("survival_fraction must lie in (0, 1]");
    if (species_max_stagnation < 1) fail("species_max_stagnation must be positive");
    if (reinjection_period < 0) fail("reinjection_period must be non-negative");
    if (reinjection_count < 0 || (reinjection_period > 0 && reinjection_count >= pop_size - elitism &&
                                  reinjection_count > 0))
        fail("reinjection_count must be smaller than pop_size - elitism");
    mutation.validate();
    for (const auto& e : mutation_schedule) {
        if (e.first > e.last) fail("mutation schedule range is empty");
        e.params.validate();
    }
}

void speciate(std::span<const Genome> population, std::vector<Species>& species, double threshold,
              int& next_species_id, Random& rng, const CompatibilityCoefficients& coeffs) {
    if (!(threshold > 0.0)) throw std::invalid_argument("compatibility threshold must be positive");
    for (auto& s : species) s.members.clear();
    for (std::size_t i = 0; i < population.size(); ++i) {
        bool placed = false;
        for (auto& s : species) {
            if (compatibility_distance(population[i], s.representative, coeffs) < threshold) {
                s.members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Species s;
            s.id = next_species_id++;
            s.representative = population[i];
            s.representative.fitness.reset();
            s.members.push_back(i);
            species.push_back(std::move(s));
        }
    }
    std::erase_if(species, [](const Species& s) { return s.members.empty(); });
    for (auto& s : species) {
        s.representative = population[s.members[rng.index(s.members.size())]];
        s.representative.fitness.reset();
    }
}

std::vector<int> offspring_quotas(std::span<const double> weights, std::span<const int> ids, int slots) {
    const std::size_t n = weights.size();
    std::vector<int> quota(n, 0);
    if (n == 0 || slots <= 0) return quota;
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> exact(n);
    for (std::size_t i = 0; i < n; ++i)
        exact[i] = total > 0.0 ? weights[i] / total * slots : static_cast<double>(slots) / n;
    int assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        quota[i] = static_cast<int>(std::floor(exact[i]));
        assigned += quota[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = exact[a] - quota[a];
        const double rb = exact[b] - quota[b];
        if (ra != rb) return ra > rb;
        return ids[a] < ids[b];
    });
    for (std::size_t k = 0; assigned < slots; k = (k + 1) % n) {
        ++quota[order[k]];
        ++assigned;
    }
    return quota;
}

namespace {

double fitness_of(const Genome& g) {
    if (!g.fitness) throw std::invalid_argument("genome has no fitness assigned");
    return *g.fitness;
}

/// Population indices sorted by fitness, best first; ties keep index order.
std::vector<std::size_t> ranked(std::span<const Genome> population) {
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fitness_of(population[a]) > fitness_of(population[b]);
    });
    return order;
}

}  // namespace

std::vector<double> shared_fitness(std::span<const Species> species, std::span<const Genome> population) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : species)
        for (std::size_t m : s.members) lo = std::min(lo, fitness_of(population[m]));
    std::vector<double> out;
    out.reserve(species.size());
    for (const auto& s : species) {
        double sum = 0.0;
        for (std::size_t m : s.members) sum += fitness_of(population[m]) - lo;
        out.push_back(s.members.empty() ? 0.0 : sum / static_cast<double>(s.members.size()));
    }
    return out;
}

void update_stagnation(std::vector<Species>& species, std::span<const Genome> population) {
    for (auto& s : species) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t m : s.members) best = std::max(best, fitness_of(population[m]));
        if (best > s.best_fitness_ever) {
            s.best_fitness_ever = best;
            s.generations_since_improvement = 0;
        } else {
            ++s.generations_since_improvement;
        }
    }
}

void remove_stagnant(std::vector<Species>& species, std::span<const Genome> population,
                     int max_stagnation) {
    if (population.empty()) return;
    const std::size_t champ = ranked(population).front();
    std::erase_if(species, [&](const Species& s) {
        if (s.generations_since_improvement <= max_stagnation) return false;
        return std::find(s.members.begin(), s.members.end(), champ) == s.members.end();
    });
}

std::vector<Genome> reproduce(std::vector<Species>& species, std::span<const Genome> population,
                              const EvolveParams& params, const MutationParams& mutation,
                              InnovationRegistry& registry, Random& rng, MutationLog* log) {
    std::vector<Genome> next;
    next.reserve(static_cast<std::size_t>(params.pop_size));
    const auto order = ranked(population);
    const int elites = std::min<int>(params.elitism, static_cast<int>(order.size()));
    for (int e = 0; e < elites; ++e) {
        Genome g = population[order[static_cast<std::size_t>(e)]];
        g.fitness.reset();
        next.push_back(std::move(g));
    }

    remove_stagnant(species, population, params.species_max_stagnation);
    if (species.empty()) {
        if (params.reset_on_extinction) {
            // Every member is fair game again once nothing survives.
            Species all;
            for (std::size_t i = 0; i < population.size(); ++i) all.members.push_back(i);
            species.push_back(std::move(all));
        } else {
            throw std::logic_error("every species went extinct");
        }
    }

    const auto weights = shared_fitness(species, population);
    std::vector<int> ids;
    for (const auto& s : species) ids.push_back(s.id);
    const auto quotas = offspring_quotas(weights, ids, params.pop_size - elites);

    for (std::size_t si = 0; si < species.size(); ++si) {
        const auto& s = species[si];
        if (quotas[si] == 0) continue;
        std::vector<std::size_t> members = s.members;
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return fitness_of(population[a]) > fitness_of(population[b]);
        });
        const std::size_t n = members.size();
        const std::size_t keep =
            std::max(std::min<std::size_t>(2, n),
                     static_cast<std::size_t>(std::ceil(params.survival_fraction * static_cast<double>(n))));
        const std::size_t n_parents = std::min(keep, n);
        for (int k = 0; k < quotas[si]; ++k) {
            Genome child;
            if (n_parents == 1) {
                child = population[members.front()];
            } else {
                const std::size_t a = rng.index(n_parents);
                std::size_t b = rng.index(n_parents - 1);
                if (b >= a) ++b;
                const Genome& pa = population[members[a]];
                const Genome& pb = population[members[b]];
                child = crossover(pa, pb, fitness_of(pa), fitness_of(pb), rng);
            }
            next.push_back(mutate(child, mutation, registry, rng, log));
        }
    }
    return next;
}

std::vector<std::size_t> reinject_diversity(std::vector<Genome>& population, int count,
                                            InnovationRegistry& registry, Random& rng,
                                            WeightRange range) {
    if (count <= 0 || population.empty()) return {};
    if (count >= static_cast<int>(population.size()))
        throw std::invalid_argument("reinjection count must be smaller than the population");
    auto order = ranked(population);
    std::vector<std::size_t> worst(order.end() - count, order.end());
    std::sort(worst.begin(), worst.end());
    const int n_in = population.front().n_inputs;
    const int n_out = population.front().n_outputs;
    for (std::size_t i : worst) population[i] = new_minimal_genome(n_in, n_out, registry, rng, range);
    return worst;
}

std::vector<Genome> seed_from_champion(const Genome& champion, int pop_size, int n_inputs,
                                       int n_outputs, const MutationParams& params,
                                       InnovationRegistry& registry, Random& rng) {
    if (champion.n_inputs != n_inputs || champion.n_outputs != n_outputs)
        throw DimensionError("champion has " + std::to_string(champion.n_inputs) + " inputs and " +
                             std::to_string(champion.n_outputs) + " outputs, scenario needs " +
                             std::to_string(n_inputs) + " and " + std::to_string(n_outputs));
    registry.absorb(champion);
    Genome clone = champion;
    clone.fitness.reset();
    std::vector<Genome> out;
    out.reserve(static_cast<std::size_t>(pop_size));
    for (int i = 0; i < pop_size; ++i)
        out.push_back(i < kTransferClones ? clone : mutate(clone, params, registry, rng));
    return out;
}

namespace {

void assign(std::vector<Genome>& genomes, std::span<const std::size_t> idx,
            const std::vector<double>& fitness, int generation) {
    if (fitness.size() != idx.size())
        throw EvaluationError("generation " + std::to_string(generation) + ": evaluator returned " +
                              std::to_string(fitness.size()) + " values for " +
                              std::to_string(idx.size()) + " genomes");
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (!std::isfinite(fitness[k]))
            throw EvaluationError("generation " + std::to_string(generation) + ", genome " +
                                  std::to_string(idx[k]) + ": non-finite fitness");
        genomes[idx[k]].fitness = fitness[k];
    }
}

std::vector<double> call_evaluator(const PopulationEvaluator& eval, std::span<const Genome> genomes,
                                   int generation) {
    try {
        return eval(genomes, generation);
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError("generation " + std::to_string(generation) + ": " + e.what());
    }
}

}  // namespace

RunResult run_evolution(const PopulationEvaluator& evaluator, const EvolveParams& params,
                        int n_generations, std::uint64_t master_seed, RunOptions options) {
    params.validate();
    if (n_generations < 1) throw std::invalid_argument("n_generations must be at least 1");
    RunResult result;
    InnovationRegistry& registry = result.registry;
    Random rng(derive_seed({master_seed, 0xe7017e00ULL}));

    std::vector<Genome> population = std::move(options.initial_population);
    if (population.empty()) {
        population.reserve(static_cast<std::size_t>(params.pop_size));
        for (int i = 0; i < params.pop_size; ++i)
            population.push_back(new_minimal_genome(options.n_inputs, options.n_outputs, registry, rng,
                                                    params.mutation.init_range));
    } else {
        if (static_cast<int>(population.size()) != params.pop_size)
            throw std::invalid_argument("initial population size differs from pop_size");
        for (const auto& g : population) registry.absorb(g);
    }

    std::vector<Species> species;
    int next_species_id = 1;
    MutationLog breeding;
    bool have_champion = false;
    for (int gen = 0; gen < n_generations; ++gen) {
        speciate(population, species, params.compatibility_threshold, next_species_id, rng,
                 params.compatibility);
        std::vector<std::size_t> all(population.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        assign(population, all, call_evaluator(evaluator, population, gen), gen);

        GenerationStats stats;
        stats.generation = gen;
        stats.mutations = breeding;
        if (params.reinjection_period > 0 && gen > 0 && gen % params.reinjection_period == 0 &&
            params.reinjection_count > 0) {
            const auto replaced = reinject_diversity(population, params.reinjection_count, registry, rng,
                                                     params.mutation.init_range);
            std::vector<Genome> fresh;
            for (std::size_t i : replaced) fresh.push_back(population[i]);
            assign(population, replaced, call_evaluator(evaluator, fresh, gen), gen);
            speciate(population, species, params.compatibility_threshold, next_species_id, rng,
                     params.compatibility);
            stats.reinjected = true;
        }
        update_stagnation(species, population);

        const auto order = ranked(population);
        double sum = 0.0;
        for (const auto& g : population) sum += *g.fitness;
        stats.best_fitness = *population[order.front()].fitness;
        stats.mean_fitness = sum / static_cast<double>(population.size());
        stats.species_count = static_cast<int>(species.size());
        stats.champion = population[order.front()];
        if (!have_champion || stats.best_fitness > *result.champion.fitness) {
            result.champion = stats.champion;
            have_champion = true;
        }
        if (options.on_generation) options.on_generation(stats, population);
        result.history.push_back(std::move(stats));

        if (params.stop_at_threshold && result.history.back().best_fitness >= params.fitness_threshold)
            break;
        if (gen + 1 == n_generations) break;
        breeding = MutationLog{};
        population = reproduce(species, population, params, params.mutation_at(gen + 1), registry, rng,
                               &breeding);
    }
    return result;
}

}  // namespace neatnav
