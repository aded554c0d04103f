#include "neatnav/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <queue>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "neatnav/errors.hpp"
#include "neatnav/random.hpp"

namespace neatnav {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::all_goals: return "all_goals";
        case Termination::timeout: return "timeout";
        case Termination::stagnation: return "stagnation";
        case Termination::collision_cap: return "collision_cap";
    }
    return "?";
}

std::string_view to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::greedy_rooms: return "greedy_rooms";
        case BaselineKind::spiral_sweep: return "spiral_sweep";
        case BaselineKind::greedy_checkpoints: return "greedy_checkpoints";
    }
    return "?";
}

std::optional<BaselineKind> parse_baseline(std::string_view s) {
    if (s == "greedy_rooms") return BaselineKind::greedy_rooms;
    if (s == "spiral_sweep") return BaselineKind::spiral_sweep;
    if (s == "greedy_checkpoints") return BaselineKind::greedy_checkpoints;
    return std::nullopt;
}

std::string_view to_string(SeedMode mode) {
    switch (mode) {
        case SeedMode::per_genome: return "per_genome";
        case SeedMode::shared: return "shared";
        case SeedMode::fixed: return "fixed";
    }
    return "?";
}

std::optional<SeedMode> parse_seed_mode(std::string_view s) {
    if (s == "per_genome") return SeedMode::per_genome;
    if (s == "shared") return SeedMode::shared;
    if (s == "fixed") return SeedMode::fixed;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Policies

NetworkPolicy::NetworkPolicy(const Network& net)
    : net_(net), scratch_(net.slot_count()), out_(static_cast<std::size_t>(net.n_outputs())) {}

ActionCommand NetworkPolicy::act(const StepContext& ctx) {
    net_.activate(ctx.observation, scratch_, out_);
    return scale_action(out_, ctx.world.config.allow_reverse);
}

ActionCommand ReplayPolicy::act(const StepContext& ctx) {
    const auto k = static_cast<std::size_t>(ctx.step);
    return k < actions_.size() ? actions_[k] : ActionCommand{};
}

namespace {

/// Steering toward a point with an escape routine for contacts and close obstacles.
class Steering {
public:
    explicit Steering(std::uint64_t seed, double trigger = 0.7)
        : rng_(derive_seed({seed, 0xba5e11e5ULL})), trigger_(trigger) {}

    /// True while an escape manoeuvre is in progress; fills `cmd`.
    bool avoid(const StepContext& ctx, ActionCommand& cmd) {
        const bool hit = ctx.last_events && ctx.last_events->collision;
        // A fresh contact always restarts the manoeuvre: the forward cone can miss a corner at the side.
        if (hit || (turn_steps_ == 0 && escape_steps_ == 0)) {
            if (!hit && front_clear(ctx) > trigger_) return false;
            const double left = raycast(ctx.world, ctx.rover.position, ctx.rover.heading + kPi / 3, 4.0, ctx.t);
            const double right = raycast(ctx.world, ctx.rover.position, ctx.rover.heading - kPi / 3, 4.0, ctx.t);
            turn_dir_ = left == right ? (rng_.uniform() < 0.5 ? 1.0 : -1.0) : (left > right ? 1.0 : -1.0);
            turn_steps_ = 5 + static_cast<int>(rng_.index(11));
            escape_steps_ = 10 + static_cast<int>(rng_.index(21));
            ++bounces_;
        }
        if (turn_steps_ > 0) {
            --turn_steps_;
            cmd = {0.0, turn_dir_ * kMaxTurnRate};
        } else {
            --escape_steps_;
            cmd = {front_clear(ctx) > 0.35 ? kMaxSpeed : 0.0, 0.0};
            if (cmd.v == 0.0) escape_steps_ = 0;
        }
        return true;
    }

    static ActionCommand toward(const RoverState& r, Vec2 target) {
        const Vec2 d = target - r.position;
        const double err = wrap_angle(std::atan2(d.y, d.x) - r.heading);
        const double omega = std::clamp(err / (kPi / 4), -1.0, 1.0) * kMaxTurnRate;
        const double v = std::abs(err) < kPi / 3 ? kMaxSpeed : 0.2 * kMaxSpeed;
        return {v, omega};
    }

    int bounces() const { return bounces_; }

private:
    /// Shortest range over a forward cone wide enough for the rover body.
    static double front_clear(const StepContext& ctx) {
        double best = kInf;
        for (int k = -2; k <= 2; ++k)
            best = std::min(best, raycast(ctx.world, ctx.rover.position, ctx.rover.heading + k * kPi / 12,
                                          2.0, ctx.t));
        return best;
    }

    Random rng_;
    double trigger_;
    int turn_steps_ = 0;
    int escape_steps_ = 0;
    double turn_dir_ = 1.0;
    int bounces_ = 0;
};

/// Occupancy grid over the static geometry with a cost-to-go field per goal.
class PathGrid {
public:
    explicit PathGrid(const World& w) : cell_(w.width > 60.0 ? 0.5 : 0.25) {
        nx_ = static_cast<int>(std::ceil(w.width / cell_));
        ny_ = static_cast<int>(std::ceil(w.height / cell_));
        blocked_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
        const double keep_out = kRoverRadius + 0.2;
        for (const auto& seg : w.walls) {
            const int x0 = to_cell(std::min(seg.a.x, seg.b.x) - keep_out, nx_);
            const int x1 = to_cell(std::max(seg.a.x, seg.b.x) + keep_out, nx_);
            const int y0 = to_cell(std::min(seg.a.y, seg.b.y) - keep_out, ny_);
            const int y1 = to_cell(std::max(seg.a.y, seg.b.y) + keep_out, ny_);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (point_segment_distance(center(x, y), seg) < keep_out) blocked_[index(x, y)] = 1;
        }
        for (const auto& poly : w.obstacles) {
            double lx = kInf, hx = -kInf, ly = kInf, hy = -kInf;
            for (const auto& v : poly) {
                lx = std::min(lx, v.x), hx = std::max(hx, v.x);
                ly = std::min(ly, v.y), hy = std::max(hy, v.y);
            }
            for (int y = to_cell(ly, ny_); y <= to_cell(hy, ny_); ++y)
                for (int x = to_cell(lx, nx_); x <= to_cell(hx, nx_); ++x)
                    if (contains(poly, center(x, y))) blocked_[index(x, y)] = 1;
        }
    }

    /// Recomputes the cost-to-go toward `goal`; false when no free cell is near it.
    bool set_goal(Vec2 goal) {
        cost_.assign(blocked_.size(), kUnreached);
        const auto start = nearest_free(goal, 3.0);
        if (!start) return false;
        using Item = std::pair<int, int>;  // (cost, cell)
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        cost_[*start] = 0;
        open.push({0, *start});
        while (!open.empty()) {
            const auto [c, i] = open.top();
            open.pop();
            if (c != cost_[static_cast<std::size_t>(i)]) continue;
            const int x = i % nx_, y = i / nx_;
            for (const auto& [dx, dy, step] : kMoves) {
                const int X = x + dx, Y = y + dy;
                if (!free(X, Y)) continue;
                if (dx != 0 && dy != 0 && (!free(x + dx, y) || !free(x, y + dy))) continue;
                const std::size_t j = index(X, Y);
                if (c + step < cost_[j]) {
                    cost_[j] = c + step;
                    open.push({cost_[j], static_cast<int>(j)});
                }
            }
        }
        return true;
    }

    /// A point a few cells down the cost gradient from `p`, if `p` can reach the goal.
    std::optional<Vec2> waypoint(Vec2 p) const {
        const auto start = nearest_free(p, 1.0);
        if (!start || cost_[*start] == kUnreached) return std::nullopt;
        int i = static_cast<int>(*start);
        for (int k = 0; k < kLookahead; ++k) {
            const int x = i % nx_, y = i / nx_;
            int best = i;
            for (const auto& [dx, dy, step] : kMoves) {
                const int X = x + dx, Y = y + dy;
                if (!free(X, Y)) continue;
                const auto j = static_cast<int>(index(X, Y));
                if (cost_[static_cast<std::size_t>(j)] < cost_[static_cast<std::size_t>(best)]) best = j;
            }
            if (best == i) break;
            i = best;
        }
        return center(i % nx_, i / nx_);
    }

private:
    static constexpr int kUnreached = std::numeric_limits<int>::max();
    static constexpr int kLookahead = 6;
    struct Move {
        int dx, dy, cost;
    };
    static constexpr Move kMoves[8] = {{1, 0, 10},  {-1, 0, 10}, {0, 1, 10},  {0, -1, 10},
                                       {1, 1, 14},  {1, -1, 14}, {-1, 1, 14}, {-1, -1, 14}};

    int to_cell(double v, int n) const { return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, n - 1); }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }
    Vec2 center(int x, int y) const { return {(x + 0.5) * cell_, (y + 0.5) * cell_}; }
    bool free(int x, int y) const { return x >= 0 && y >= 0 && x < nx_ && y < ny_ && !blocked_[index(x, y)]; }

    std::optional<std::size_t> nearest_free(Vec2 p, double radius) const {
        const int cx = to_cell(p.x, nx_), cy = to_cell(p.y, ny_);
        const int r = static_cast<int>(std::ceil(radius / cell_));
        std::optional<std::size_t> best;
        double best_d = kInf;
        for (int y = cy - r; y <= cy + r; ++y)
            for (int x = cx - r; x <= cx + r; ++x) {
                if (!free(x, y)) continue;
                const double d = distance(center(x, y), p);
                if (d < best_d) best_d = d, best = index(x, y);
            }
        return best;
    }

    double cell_;
    int nx_ = 0, ny_ = 0;
    std::vector<char> blocked_;
    std::vector<int> cost_;
};

/// Nearest unvisited goal first, home once every target is done. Routes
/// through doorways on a grid over the static geometry and bounces off
/// moving obstacles.
class GreedyGoals final : public Policy {
public:
    explicit GreedyGoals(const World& w) : steer_(w.config.seed, 0.4), grid_(w) {}

    ActionCommand act(const StepContext& ctx) override {
        const auto& w = ctx.world;
        const bool targets_done = ctx.progress.all_targets_done(w);
        int best = -1;
        double best_d = kInf;
        for (std::size_t g = 0; g < w.goals.size(); ++g) {
            if (ctx.progress.goal_done[g]) continue;
            if ((w.goals[g].kind == GoalKind::home) != targets_done) continue;
            const double d = distance(ctx.rover.position, w.goals[g].position);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(g);
            }
        }
        if (best < 0) return {};
        const Vec2 goal = w.goals[static_cast<std::size_t>(best)].position;
        if (best != target_) {
            target_ = best;
            planned_ = grid_.set_goal(goal);
        }
        ActionCommand cmd;
        if (steer_.avoid(ctx, cmd)) return cmd;
        const auto via = planned_ ? grid_.waypoint(ctx.rover.position) : std::nullopt;
        return Steering::toward(ctx.rover, via && best_d > 1.0 ? *via : goal);
    }
    bool needs_observation() const override { return false; }

private:
    Steering steer_;
    PathGrid grid_;
    int target_ = -1;
    bool planned_ = false;
};

/// Archimedean spiral out of the spawn point.
class SpiralSweep final : public Policy {
public:
    static constexpr double kSpacing = 3.0;  // metres between turns

    explicit SpiralSweep(const World& w)
        : steer_(w.config.seed), center_(w.spawn), phase0_(w.spawn_heading), phi_(kPi) {}

    ActionCommand act(const StepContext& ctx) override {
        const double b = kSpacing / (2 * kPi);
        auto point = [&](double phi) {
            const double r = b * phi;
            return center_ + Vec2{r * std::cos(phi + phase0_), r * std::sin(phi + phase0_)};
        };
        while (distance(ctx.rover.position, point(phi_)) < 1.0) phi_ += 0.5 / std::max(b * phi_, 0.5);
        ActionCommand cmd;
        const int before = steer_.bounces();
        if (steer_.avoid(ctx, cmd)) {
            // Skip the part of the spiral that is blocked.
            if (steer_.bounces() != before) phi_ += 3.0 / std::max(b * phi_, 0.5);
            return cmd;
        }
        return Steering::toward(ctx.rover, point(phi_));
    }
    bool needs_observation() const override { return false; }

private:
    Steering steer_;
    Vec2 center_;
    double phase0_;
    double phi_;
};

}  // namespace

std::unique_ptr<Policy> make_baseline(BaselineKind kind, const World& world) {
    switch (kind) {
        case BaselineKind::greedy_rooms:
        case BaselineKind::greedy_checkpoints: return std::make_unique<GreedyGoals>(world);
        case BaselineKind::spiral_sweep: return std::make_unique<SpiralSweep>(world);
    }
    throw std::invalid_argument("unknown baseline");
}

// ---------------------------------------------------------------------------
// Episodes

bool episode_success(const World& world, const EpisodeProgress& progress, Termination termination) {
    if (termination == Termination::collision_cap) return false;
    if (world.config.kind == ScenarioKind::outdoor_rescue) {
        const int need = (3 * world.target_count() + 3) / 4;  // ceil(0.75 n)
        return progress.targets_done >= need;
    }
    return progress.finished(world);
}

EpisodeResult run_episode(Policy& policy, const World& world, const EpisodeOptions& options) {
    const ScenarioConfig& cfg = world.config;
    const RewardConstants constants = RewardConstants::for_scenario(cfg.kind, cfg.exploration_reward);
    const int budget = cfg.step_budget();
    const double dt = cfg.dt;

    RoverState rover = spawn_rover(world);
    EpisodeProgress progress = start_episode(world, rover);
    RewardLedger ledger;
    StagnationMonitor monitor;
    monitor.record(0.0, rover.position);
    SenseScratch scratch;
    std::vector<double> obs;
    const bool wants_obs = policy.needs_observation();

    EpisodeResult res;
    res.seed = cfg.seed;
    res.total_cells = world.total_cells();
    res.termination = Termination::timeout;
    StepEvents last{};
    bool stagnated = false;
    for (int k = 0; k < budget; ++k) {
        const double t = k * dt;
        if (wants_obs) sense(world, rover, t, progress, scratch, obs);
        const StepContext ctx{world, rover, progress, t, k, obs, k > 0 ? &last : nullptr};
        const ActionCommand action = policy.act(ctx);
        auto [next, ev] = step(world, rover, action, t, progress);
        rover = next;
        accumulate(ledger, ev, constants, dt);
        const double t1 = (k + 1) * dt;
        monitor.record(t1, rover.position, ev.goal_reached.has_value());
        res.steps = k + 1;
        if (options.record_actions) res.actions.push_back(action);
        if (options.record_trajectory) res.trajectory.push_back({t1, rover, action, ev, ledger.total});
        last = ev;
        if (progress.finished(world)) {
            res.termination = Termination::all_goals;
            break;
        }
        if (ledger.collisions >= cfg.collision_cap) {
            res.termination = Termination::collision_cap;
            break;
        }
        if (monitor.check(t1)) {
            res.termination = Termination::stagnation;
            stagnated = true;
            break;
        }
    }
    const FitnessResult fr = finalize(ledger, stagnated, constants);
    if (options.record_trajectory && stagnated && !res.trajectory.empty())
        res.trajectory.back().reward = fr.fitness;
    res.fitness = fr.fitness;
    res.breakdown = fr.breakdown;
    res.sim_time = res.steps * dt;
    res.goals_reached = progress.goals_done;
    res.targets_reached = progress.targets_done;
    res.collisions = ledger.collisions;
    res.cells_visited = progress.cells_visited;
    res.goal_ids = ledger.goal_ids;
    res.success = episode_success(world, progress, res.termination);
    return res;
}

namespace {

void check_width(const Network& net, const ScenarioConfig& cfg) {
    const int want = observation_width(cfg);
    if (net.n_inputs() != want)
        throw DimensionError("network expects " + std::to_string(net.n_inputs()) +
                             " observation values, " + std::string(to_string(cfg.kind)) +
                             " provides " + std::to_string(want));
    if (net.n_outputs() < kActionOutputs)
        throw DimensionError("network has " + std::to_string(net.n_outputs()) + " outputs, needs " +
                             std::to_string(kActionOutputs));
}

}  // namespace

EpisodeResult run_episode(const Network& network, ScenarioConfig config, std::uint64_t seed,
                          const EpisodeOptions& options) {
    check_width(network, config);
    config.seed = seed;
    const World world = build_scenario(config);
    NetworkPolicy policy(network);
    return run_episode(policy, world, options);
}

// ---------------------------------------------------------------------------
// Parallel evaluation

std::uint64_t episode_seed(const EvalPlan& plan, std::size_t genome_index, int episode) {
    const auto gen = static_cast<std::uint64_t>(plan.generation);
    const auto ep = static_cast<std::uint64_t>(episode);
    switch (plan.seed_mode) {
        case SeedMode::per_genome:
            return derive_seed({plan.master_seed, gen, static_cast<std::uint64_t>(genome_index), ep});
        case SeedMode::shared: return derive_seed({plan.master_seed, gen, ep, 0x5a5eULL});
        case SeedMode::fixed: return derive_seed({plan.master_seed, ep, 0xf1eedULL});
    }
    return 0;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            if (failed.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

/// One world per distinct seed, built in parallel.
std::map<std::uint64_t, World> build_worlds(const ScenarioConfig& config,
                                            const std::vector<std::uint64_t>& seeds, int workers) {
    std::vector<std::uint64_t> unique = seeds;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<World> worlds(unique.size());
    parallel_for(unique.size(), workers, [&](std::size_t i) {
        ScenarioConfig c = config;
        c.seed = unique[i];
        worlds[i] = build_scenario(c);
    });
    std::map<std::uint64_t, World> out;
    for (std::size_t i = 0; i < unique.size(); ++i) out.emplace(unique[i], std::move(worlds[i]));
    return out;
}

}  // namespace

std::vector<double> evaluate_population(std::span<const Genome> genomes, const ScenarioConfig& config,
                                        const EvalPlan& plan) {
    if (genomes.empty()) return {};
    if (plan.episodes_per_genome < 1) throw std::invalid_argument("episodes_per_genome must be positive");
    std::vector<Network> nets;
    nets.reserve(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        try {
            nets.push_back(decode(genomes[i]));
            check_width(nets.back(), config);
        } catch (const Error& e) {
            throw EvaluationError("genome " + std::to_string(i) + ": " + e.what());
        }
    }
    const auto eps = static_cast<std::size_t>(plan.episodes_per_genome);
    std::vector<std::uint64_t> seeds(genomes.size() * eps);
    for (std::size_t i = 0; i < genomes.size(); ++i)
        for (std::size_t e = 0; e < eps; ++e) seeds[i * eps + e] = episode_seed(plan, i, static_cast<int>(e));
    const auto worlds = build_worlds(config, seeds, plan.workers);

    std::vector<double> fit(seeds.size());
    parallel_for(seeds.size(), plan.workers, [&](std::size_t job) {
        NetworkPolicy policy(nets[job / eps]);
        fit[job] = run_episode(policy, worlds.at(seeds[job])).fitness;
    });
    std::vector<double> mean(genomes.size(), 0.0);
    for (std::size_t i = 0; i < genomes.size(); ++i) {
        double s = 0.0;
        for (std::size_t e = 0; e < eps; ++e) s += fit[i * eps + e];
        mean[i] = s / static_cast<double>(eps);
    }
    return mean;
}

std::vector<EpisodeResult> evaluate_network(const Network& network, const ScenarioConfig& config,
                                            std::span<const std::uint64_t> seeds, int workers,
                                            const EpisodeOptions& options) {
    check_width(network, config);
    std::vector<std::uint64_t> s(seeds.begin(), seeds.end());
    const auto worlds = build_worlds(config, s, workers);
    std::vector<EpisodeResult> out(s.size());
    parallel_for(s.size(), workers, [&](std::size_t i) {
        NetworkPolicy policy(network);
        out[i] = run_episode(policy, worlds.at(s[i]), options);
    });
    return out;
}

std::vector<EpisodeResult> evaluate_baseline(BaselineKind kind, const ScenarioConfig& config,
                                             std::span<const std::uint64_t> seeds, int workers,
                                             const EpisodeOptions& options) {
    std::vector<std::uint64_t> s(seeds.begin(), seeds.end());
    const auto worlds = build_worlds(config, s, workers);
    std::vector<EpisodeResult> out(s.size());
    parallel_for(s.size(), workers, [&](std::size_t i) {
        const World& w = worlds.at(s[i]);
        auto policy = make_baseline(kind, w);
        out[i] = run_episode(*policy, w, options);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Weight search

WeightSearchResult optimize_weights(const Genome& genome, const WeightObjective& objective,
                                    long step_budget, Random& rng, const WeightSearchOptions& opt) {
    WeightSearchResult res;
    res.genome = genome;
    if (step_budget <= 0) return res;
    const Evaluation first = objective(genome);
    res.steps_used = first.steps;
    res.initial_fitness = res.final_fitness = first.fitness;
    res.genome.fitness = first.fitness;
    while (res.steps_used < step_budget) {
        ++res.iterations;
        std::optional<Genome> best;
        double best_fit = res.final_fitness;
        for (int j = 0; j < opt.lambda && res.steps_used < step_budget; ++j) {
            Genome cand = res.genome;
            for (auto& c : cand.connections)
                if (c.enabled)
                    c.weight = std::clamp(c.weight + rng.gaussian(0.0, opt.sigma), opt.weight_min,
                                          opt.weight_max);
            const Evaluation ev = objective(cand);
            res.steps_used += ev.steps;
            if (ev.fitness > best_fit) {
                best_fit = ev.fitness;
                cand.fitness = ev.fitness;
                best = std::move(cand);
            }
        }
        if (best) {
            res.genome = std::move(*best);
            res.final_fitness = best_fit;
            ++res.accepted;
        }
    }
    return res;
}

std::vector<std::uint64_t> finetune_batch(Random& rng, int episodes) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < episodes; ++i) seeds.push_back(rng.next_u64());
    return seeds;
}

WeightSearchResult finetune_champion(const Genome& genome, const ScenarioConfig& config,
                                     long step_budget, Random& rng, const FinetuneOptions& options) {
    validate(genome);
    if (step_budget <= 0) {
        WeightSearchResult res;
        res.genome = genome;
        return res;
    }
    check_width(decode(genome), config);
    const auto seeds = finetune_batch(rng, options.batch_episodes);
    const auto worlds = build_worlds(config, seeds, options.workers);
    const WeightObjective objective = [&](const Genome& g) {
        const Network net = decode(g);
        std::vector<EpisodeResult> rs(seeds.size());
        parallel_for(seeds.size(), options.workers, [&](std::size_t i) {
            NetworkPolicy policy(net);
            rs[i] = run_episode(policy, worlds.at(seeds[i]));
        });
        Evaluation ev;
        double s = 0.0;
        for (const auto& r : rs) {
            s += r.fitness;
            ev.steps += r.steps;
        }
        ev.fitness = s / static_cast<double>(rs.size());
        return ev;
    };
    return optimize_weights(genome, objective, step_budget, rng, options.search);
}

// ---------------------------------------------------------------------------
// Metrics and records

Metrics compute_metrics(std::span<const EpisodeResult> results, int total_cells) {
    if (results.empty()) throw std::invalid_argument("metrics need at least one trial");
    Metrics m;
    m.trials = static_cast<int>(results.size());
    int wins = 0;
    double collisions = 0.0, time = 0.0, cells = 0.0, reward = 0.0, goals = 0.0;
    for (const auto& r : results) {
        collisions += r.collisions;
        cells += r.cells_visited;
        reward += r.fitness;
        goals += r.targets_reached;
        if (r.success) {
            ++wins;
            time += r.sim_time;
        }
    }
    const double n = static_cast<double>(results.size());
    m.success_rate = wins / n;
    m.avg_collisions = collisions / n;
    if (wins > 0) m.avg_completion_time = time / wins;
    m.area_explored = total_cells > 0 ? cells / n / total_cells : 0.0;
    m.avg_reward = reward / n;
    m.avg_goals = goals / n;
    return m;
}

void write_action_log(std::ostream& out, const ActionLog& log) {
    out << "actionlog " << to_string(log.kind) << " seed " << log.seed << " steps " << log.steps
        << " fitness " << format_double(log.fitness) << '\n';
    for (const auto& a : log.actions) out << "a " << format_double(a.v) << ' ' << format_double(a.omega) << '\n';
}

ActionLog read_action_log(std::istream& in) {
    ActionLog log;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    auto parse_double = [&](const std::string& tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw FormatError("bad number '" + tok + "'", line_no);
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (!have_header) {
            std::string kind, k_seed, k_steps, k_fit, fit;
            if (tag != "actionlog" || !(ss >> kind >> k_seed >> log.seed >> k_steps >> log.steps >> k_fit >> fit) ||
                k_seed != "seed" || k_steps != "steps" || k_fit != "fitness")
                throw FormatError("expected 'actionlog <kind> seed <n> steps <n> fitness <x>'", line_no);
            const auto pk = parse_scenario_kind(kind);
            if (!pk) throw FormatError("unknown scenario kind '" + kind + "'", line_no);
            log.kind = *pk;
            log.fitness = parse_double(fit);
            if (log.steps < 0) throw FormatError("negative step count", line_no);
            have_header = true;
            continue;
        }
        std::string v, w, extra;
        if (tag != "a" || !(ss >> v >> w) || (ss >> extra))
            throw FormatError("expected 'a <v> <omega>'", line_no);
        log.actions.push_back({parse_double(v), parse_double(w)});
    }
    if (!have_header) throw FormatError("missing action log header", line_no + 1);
    if (static_cast<int>(log.actions.size()) != log.steps)
        throw FormatError("log truncated: header promises " + std::to_string(log.steps) +
                              " actions, found " + std::to_string(log.actions.size()),
                          line_no + 1);
    return log;
}

std::string trajectory_json(const TrajectoryPoint& p) {
    nlohmann::ordered_json j;
    j["t"] = p.t;
    j["x"] = p.rover.position.x;
    j["y"] = p.rover.position.y;
    j["heading"] = p.rover.heading;
    j["v"] = p.action.v;
    j["omega"] = p.action.omega;
    nlohmann::ordered_json ev;
    ev["collision"] = p.events.collision;
    ev["goal"] = p.events.goal_reached ? nlohmann::ordered_json(*p.events.goal_reached) : nullptr;
    ev["hazard"] = p.events.hazard_exposure;
    ev["new_cell"] = p.events.new_cell;
    ev["distance"] = p.events.distance_moved;
    j["events"] = ev;
    j["reward"] = p.reward;
    return j.dump();
}

std::string result_json(const EpisodeResult& r, int trial) {
    nlohmann::ordered_json j;
    j["trial"] = trial;
    j["seed"] = r.seed;
    j["fitness"] = r.fitness;
    j["success"] = r.success;
    j["termination"] = std::string(to_string(r.termination));
    j["steps"] = r.steps;
    j["sim_time"] = r.sim_time;
    j["goals_reached"] = r.goals_reached;
    j["targets_reached"] = r.targets_reached;
    j["goal_ids"] = r.goal_ids;
    j["collisions"] = r.collisions;
    j["cells_visited"] = r.cells_visited;
    j["total_cells"] = r.total_cells;
    nlohmann::ordered_json b;
    b["goals"] = r.breakdown.goals;
    b["exploration"] = r.breakdown.exploration;
    b["time"] = r.breakdown.time;
    b["distance"] = r.breakdown.distance;
    b["collision"] = r.breakdown.collision;
    b["hazard"] = r.breakdown.hazard;
    b["stagnation"] = r.breakdown.stagnation;
    j["breakdown"] = b;
    return j.dump();
}

std::string metrics_csv_header() {
    return "policy,trials,success_rate,avg_collisions,avg_completion_time,area_explored,avg_reward,avg_goals";
}

std::string metrics_csv_row(std::string_view policy, const Metrics& m) {
    std::ostringstream os;
    os << policy << ',' << m.trials << ',' << format_double(m.success_rate) << ','
       << format_double(m.avg_collisions) << ','
       << (m.avg_completion_time ? format_double(*m.avg_completion_time) : std::string("")) << ','
       << format_double(m.area_explored) << ',' << format_double(m.avg_reward) << ','
       << format_double(m.avg_goals);
    return os.str();
}

}  // namespace neatnav
