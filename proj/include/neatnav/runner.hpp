#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neatnav/fitness.hpp"
#include "neatnav/genome.hpp"
#include "neatnav/network.hpp"
#include "neatnav/world.hpp"

namespace neatnav {

inline constexpr int kActionOutputs = 2;

enum class Termination : std::uint8_t { all_goals, timeout, stagnation, collision_cap };
std::string_view to_string(Termination t);

/// What a policy sees each control step. `observation` is empty for policies
/// that do not request one.
struct StepContext {
    const World& world;
    const RoverState& rover;
    const EpisodeProgress& progress;
    double t;
    int step;
    std::span<const double> observation;
    const StepEvents* last_events;  // null on the first step
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual ActionCommand act(const StepContext& ctx) = 0;
    virtual bool needs_observation() const { return true; }
};

class NetworkPolicy final : public Policy {
public:
    explicit NetworkPolicy(const Network& net);
    ActionCommand act(const StepContext& ctx) override;

private:
    const Network& net_;
    std::vector<double> scratch_;
    std::vector<double> out_;
};

/// Feeds back a recorded action sequence; zero action once it runs out.
class ReplayPolicy final : public Policy {
public:
    explicit ReplayPolicy(std::vector<ActionCommand> actions) : actions_(std::move(actions)) {}
    ActionCommand act(const StepContext& ctx) override;
    bool needs_observation() const override { return false; }

private:
    std::vector<ActionCommand> actions_;
};

enum class BaselineKind : std::uint8_t { greedy_rooms, spiral_sweep, greedy_checkpoints };
std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view s);

/// Heuristic controllers with direct access to goal coordinates and geometry.
std::unique_ptr<Policy> make_baseline(BaselineKind kind, const World& world);

struct TrajectoryPoint {
    double t = 0.0;
    RoverState rover;
    ActionCommand action;
    StepEvents events;
    double reward = 0.0;  // cumulative
};

struct EpisodeOptions {
    bool record_actions = false;
    bool record_trajectory = false;
};

struct EpisodeResult {
    std::uint64_t seed = 0;
    double fitness = 0.0;
    RewardBreakdown breakdown;
    bool success = false;
    int goals_reached = 0;    // home included
    int targets_reached = 0;  // home excluded
    int collisions = 0;
    int steps = 0;
    double sim_time = 0.0;
    int cells_visited = 0;
    int total_cells = 0;
    Termination termination = Termination::timeout;
    std::vector<int> goal_ids;
    std::vector<ActionCommand> actions;
    std::vector<TrajectoryPoint> trajectory;
};

/// Success rule by scenario: indoor and industrial need every goal incl.
/// home; outdoor needs ceil(75%) of survivors. Hitting the collision cap fails.
bool episode_success(const World& world, const EpisodeProgress& progress, Termination termination);

EpisodeResult run_episode(Policy& policy, const World& world, const EpisodeOptions& options = {});
/// Builds the world for `seed` and runs the network. Throws DimensionError on a width mismatch.
EpisodeResult run_episode(const Network& network, ScenarioConfig config, std::uint64_t seed,
                          const EpisodeOptions& options = {});

enum class SeedMode : std::uint8_t {
    per_genome,  // hash(master, generation, genome, episode)
    shared,      // hash(master, generation, episode): one layout per generation
    fixed,       // hash(master, episode): same layouts every generation
};
std::string_view to_string(SeedMode mode);
std::optional<SeedMode> parse_seed_mode(std::string_view s);

struct EvalPlan {
    std::uint64_t master_seed = 0;
    int generation = 0;
    int episodes_per_genome = 1;
    int workers = 1;
    SeedMode seed_mode = SeedMode::per_genome;
};

std::uint64_t episode_seed(const EvalPlan& plan, std::size_t genome_index, int episode);

/// Runs `count` independent jobs on `workers` threads; job order never affects results.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

/// Mean episode fitness per genome. Results are independent of plan.workers.
std::vector<double> evaluate_population(std::span<const Genome> genomes, const ScenarioConfig& config,
                                        const EvalPlan& plan);

/// Network evaluated on explicit seeds; one result per seed.
std::vector<EpisodeResult> evaluate_network(const Network& network, const ScenarioConfig& config,
                                            std::span<const std::uint64_t> seeds, int workers = 1,
                                            const EpisodeOptions& options = {});
std::vector<EpisodeResult> evaluate_baseline(BaselineKind kind, const ScenarioConfig& config,
                                             std::span<const std::uint64_t> seeds, int workers = 1,
                                             const EpisodeOptions& options = {});

// Fixed-topology weight search.

struct Evaluation {
    double fitness = 0.0;
    long steps = 0;  // simulated steps consumed
};
using WeightObjective = std::function<Evaluation(const Genome&)>;

struct WeightSearchOptions {
    int lambda = 16;
    double sigma = 0.05;
    double weight_min = -8.0;
    double weight_max = 8.0;
};

struct WeightSearchResult {
    Genome genome;
    double initial_fitness = 0.0;
    double final_fitness = 0.0;
    long steps_used = 0;
    int iterations = 0;
    int accepted = 0;
};

/// Each iteration draws `lambda` gaussian perturbations of the enabled weights
/// and moves to the best one only if it beats the incumbent. Stops once the
/// consumed steps reach `step_budget`; a zero budget returns the input untouched.
WeightSearchResult optimize_weights(const Genome& genome, const WeightObjective& objective,
                                    long step_budget, Random& rng, const WeightSearchOptions& options = {});

struct FinetuneOptions {
    WeightSearchOptions search{};
    int batch_episodes = 5;
    int workers = 1;
};

/// Seeds of the fixed fine-tuning batch drawn from `rng`.
std::vector<std::uint64_t> finetune_batch(Random& rng, int episodes);

WeightSearchResult finetune_champion(const Genome& genome, const ScenarioConfig& config,
                                     long step_budget, Random& rng, const FinetuneOptions& options = {});

struct Metrics {
    int trials = 0;
    double success_rate = 0.0;
    double avg_collisions = 0.0;
    // Successful trials only; nullopt when none succeeded.
    std::optional<double> avg_completion_time;
    double area_explored = 0.0;  // fraction of coverage cells
    double avg_reward = 0.0;
    double avg_goals = 0.0;
};

/// Throws std::invalid_argument on an empty result list.
Metrics compute_metrics(std::span<const EpisodeResult> results, int total_cells);

// Action logs: a header line followed by one `a <v> <omega>` line per step.
struct ActionLog {
    ScenarioKind kind = ScenarioKind::indoor_fire;
    std::uint64_t seed = 0;
    int steps = 0;
    double fitness = 0.0;
    std::vector<ActionCommand> actions;
};

void write_action_log(std::ostream& out, const ActionLog& log);
/// Throws FormatError naming the line on malformed or truncated input.
ActionLog read_action_log(std::istream& in);

/// One JSON object per line: trajectory, per-trial result, metrics.
std::string trajectory_json(const TrajectoryPoint& p);
std::string result_json(const EpisodeResult& r, int trial);
std::string metrics_csv_header();
std::string metrics_csv_row(std::string_view policy, const Metrics& m);

}  // namespace neatnav
