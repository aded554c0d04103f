#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "neatnav/errors.hpp"
#include "neatnav/runner.hpp"

using namespace neatnav;

namespace {

constexpr double kPi = std::numbers::pi;

World open_world(ScenarioKind kind, double size) {
    World w;
    w.config = ScenarioConfig::defaults(kind);
    w.config.arena_size = size;
    w.width = w.height = size;
    w.cells_x = w.cells_y = static_cast<int>(std::ceil(size / kCoverageCell));
    w.spawn = {size / 2, size / 2};
    return w;
}

ScenarioConfig mini_indoor() {
    auto c = ScenarioConfig::defaults(ScenarioKind::indoor_fire);
    c.arena_size = 25.0;
    c.n_rooms = 4;
    c.n_targets = 3;
    return c;
}

Genome zero_genome(int n_in) {
    InnovationRegistry reg;
    Random rng(0);
    Genome g = new_minimal_genome(n_in, 2, reg, rng);
    for (auto& c : g.connections) c.weight = 0.0;
    return g;
}

// Drives to each listed point in turn with a pure-pursuit controller.
class Tour final : public Policy {
public:
    explicit Tour(std::vector<Vec2> points) : points_(std::move(points)) {}
    ActionCommand act(const StepContext& ctx) override {
        while (next_ < points_.size() && distance(ctx.rover.position, points_[next_]) < 0.3) ++next_;
        if (next_ == points_.size()) return {};
        const Vec2 d = points_[next_] - ctx.rover.position;
        const double err = wrap_angle(std::atan2(d.y, d.x) - ctx.rover.heading);
        return {std::abs(err) < 0.3 ? 1.0 : 0.0, std::clamp(err / 0.2, -1.0, 1.0) * 90.0};
    }
    bool needs_observation() const override { return false; }

private:
    std::vector<Vec2> points_;
    std::size_t next_ = 0;
};

}  // namespace

TEST(RunEpisode, ZeroNetworkStagnatesAtFiveSeconds) {
    const auto cfg = mini_indoor();
    const Network net = decode(zero_genome(observation_width(cfg)));
    const auto r = run_episode(net, cfg, 3);
    EXPECT_EQ(r.termination, Termination::stagnation);
    EXPECT_EQ(r.steps, 50);
    EXPECT_NEAR(r.fitness, -105.0, 1e-9);
    EXPECT_FALSE(r.success);
}

TEST(RunEpisode, Deterministic) {
    const auto cfg = mini_indoor();
    InnovationRegistry reg;
    Random rng(4);
    const Network net = decode(new_minimal_genome(observation_width(cfg), 2, reg, rng));
    const auto a = run_episode(net, cfg, 77, {true, true});
    const auto b = run_episode(net, cfg, 77, {true, true});
    EXPECT_EQ(a.fitness, b.fitness);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_EQ(a.actions, b.actions);
    EXPECT_EQ(a.breakdown, b.breakdown);
}

TEST(RunEpisode, WidthMismatchThrows) {
    const Network net = decode(zero_genome(731));
    EXPECT_THROW(run_episode(net, mini_indoor(), 1), DimensionError);
}

TEST(RunEpisode, ScriptedTourSucceedsAndReplays) {
    World w = open_world(ScenarioKind::indoor_fire, 40);
    w.spawn = {5, 5};
    const std::vector<Vec2> rooms{{10, 5}, {15, 12}, {25, 12}, {30, 30}, {10, 30}};
    for (int i = 0; i < 5; ++i) w.goals.push_back({i, rooms[i], 1.0, GoalKind::room_zone});
    w.goals.push_back({5, w.spawn, 1.5, GoalKind::home});
    std::vector<Vec2> route = rooms;
    route.push_back(w.spawn);
    Tour tour(route);
    const auto r = run_episode(tour, w, {true, false});
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.goals_reached, 6);
    EXPECT_EQ(r.termination, Termination::all_goals);
    EXPECT_EQ(r.breakdown.goals, 7000.0);

    ReplayPolicy replay(r.actions);
    const auto again = run_episode(replay, w);
    EXPECT_EQ(again.fitness, r.fitness);
    EXPECT_EQ(again.breakdown, r.breakdown);
}

TEST(RunEpisode, StepsWithinBudgetAndLedgerConsistent) {
    auto cfg = mini_indoor();
    InnovationRegistry reg;
    Random rng(5);
    for (int i = 0; i < 10; ++i) {
        const Network net = decode(new_minimal_genome(observation_width(cfg), 2, reg, rng));
        const auto r = run_episode(net, cfg, 100 + i);
        EXPECT_LE(r.steps, cfg.step_budget());
        EXPECT_EQ(r.breakdown.sum(), r.fitness);
        if (r.termination == Termination::collision_cap) {
            EXPECT_EQ(r.collisions, cfg.collision_cap);
        }
    }
}

TEST(EpisodeSuccess, OutdoorNeedsThreeQuarters) {
    World w = open_world(ScenarioKind::outdoor_rescue, 100);
    for (int i = 0; i < 4; ++i) w.goals.push_back({i, {10.0 + i, 10.0}, 1.0, GoalKind::survivor});
    RoverState r = spawn_rover(w);
    auto p = start_episode(w, r);
    p.targets_done = p.goals_done = 2;
    EXPECT_FALSE(episode_success(w, p, Termination::timeout));
    p.targets_done = p.goals_done = 3;
    EXPECT_TRUE(episode_success(w, p, Termination::timeout));
    EXPECT_FALSE(episode_success(w, p, Termination::collision_cap));
}

TEST(Seeds, PerGenomeModeIsPureHash) {
    EvalPlan p;
    p.master_seed = 9;
    p.generation = 4;
    EXPECT_EQ(episode_seed(p, 3, 1), derive_seed({9, 4, 3, 1}));
    EXPECT_NE(episode_seed(p, 3, 1), episode_seed(p, 2, 1));
    p.seed_mode = SeedMode::fixed;
    const auto s = episode_seed(p, 3, 1);
    p.generation = 5;
    EXPECT_EQ(episode_seed(p, 0, 1), s);
}

TEST(EvaluatePopulation, WorkerCountInvisible) {
    const auto cfg = mini_indoor();
    InnovationRegistry reg;
    Random rng(6);
    std::vector<Genome> pop;
    for (int i = 0; i < 12; ++i) pop.push_back(new_minimal_genome(observation_width(cfg), 2, reg, rng));
    EvalPlan plan;
    plan.master_seed = 1;
    plan.episodes_per_genome = 2;
    const auto one = evaluate_population(pop, cfg, plan);
    plan.workers = 8;
    EXPECT_EQ(evaluate_population(pop, cfg, plan), one);
}

TEST(EvaluatePopulation, ClonesDifferOnlyThroughLayouts) {
    const auto cfg = mini_indoor();
    InnovationRegistry reg;
    Random rng(7);
    const Genome g = new_minimal_genome(observation_width(cfg), 2, reg, rng);
    std::vector<Genome> pop(8, g);
    EvalPlan plan;
    plan.master_seed = 2;
    const auto fit = evaluate_population(pop, cfg, plan);
    const Network net = decode(g);
    for (std::size_t i = 0; i < pop.size(); ++i)
        EXPECT_EQ(fit[i], run_episode(net, cfg, episode_seed(plan, i, 0)).fitness);
    plan.seed_mode = SeedMode::shared;
    const auto shared = evaluate_population(pop, cfg, plan);
    for (double f : shared) EXPECT_EQ(f, shared[0]);
}

TEST(EvaluatePopulation, EmptyAndBadGenome) {
    EXPECT_TRUE(evaluate_population({}, mini_indoor(), EvalPlan{}).empty());
    Genome g = neatnav::test::make_genome(722, 2, {725, 726},
                                          {{1, 725, 726, 1.0, true}, {2, 726, 725, 1.0, true}});
    std::vector<Genome> pop{g};
    try {
        evaluate_population(pop, mini_indoor(), EvalPlan{});
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("genome 0"), std::string::npos) << e.what();
    }
}

TEST(ParallelFor, RunsEveryJobAndPropagatesErrors) {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("x");
                              }),
                 std::runtime_error);
}

TEST(WeightSearch, ZeroBudgetReturnsInput) {
    InnovationRegistry reg;
    Random rng(8);
    const Genome g = neatnav::test::random_genome(3, 2, 5, reg, rng);
    int calls = 0;
    const WeightObjective obj = [&](const Genome&) {
        ++calls;
        return Evaluation{0.0, 1};
    };
    const auto r = optimize_weights(g, obj, 0, rng);
    EXPECT_TRUE(r.genome.same_genes(g));
    EXPECT_EQ(calls, 0);
}

TEST(WeightSearch, ConvergesOnSingleWeightToy) {
    const Genome g = neatnav::test::make_genome(1, 1, {}, {{1, 0, 2, 0.0, true}});
    const double optimum = 1.7;
    const WeightObjective obj = [&](const Genome& x) {
        const double w = x.connections[0].weight;
        return Evaluation{-(w - optimum) * (w - optimum), 1};
    };
    Random rng(9);
    const auto r = optimize_weights(g, obj, 20000, rng);
    EXPECT_NEAR(r.genome.connections[0].weight, optimum, 0.01 * optimum);
    EXPECT_TRUE(r.genome.same_topology(g));
    EXPECT_GE(r.final_fitness, r.initial_fitness);
}

TEST(WeightSearch, NeverRegressesAndKeepsTopology) {
    InnovationRegistry reg;
    Random rng(10);
    const Genome g = neatnav::test::random_genome(4, 2, 8, reg, rng);
    const WeightObjective obj = [&](const Genome& x) {
        double s = 0.0;
        for (const auto& c : x.connections) s -= std::abs(c.weight - 0.3);
        return Evaluation{s, 10};
    };
    const auto r = optimize_weights(g, obj, 5000, rng);
    EXPECT_GE(r.final_fitness, r.initial_fitness);
    EXPECT_TRUE(r.genome.same_topology(g));
    EXPECT_LE(r.steps_used, 5000 + 16 * 10);
}

TEST(Finetune, MonotoneOnMiniScenario) {
    auto cfg = mini_indoor();
    cfg.episode_limit = 30.0;
    InnovationRegistry reg;
    Random init(12);
    const Genome g = new_minimal_genome(observation_width(cfg), 2, reg, init);
    Random rng(13);
    const auto r = finetune_champion(g, cfg, 3000, rng);
    EXPECT_GE(r.final_fitness, r.initial_fitness);
    EXPECT_TRUE(r.genome.same_topology(g));
    Random zero(13);
    EXPECT_TRUE(finetune_champion(g, cfg, 0, zero).genome.same_genes(g));
}

TEST(Baselines, ParseNames) {
    EXPECT_EQ(parse_baseline("greedy_rooms"), BaselineKind::greedy_rooms);
    EXPECT_EQ(parse_baseline("spiral_sweep"), BaselineKind::spiral_sweep);
    EXPECT_EQ(parse_baseline("greedy_checkpoints"), BaselineKind::greedy_checkpoints);
    EXPECT_FALSE(parse_baseline("champion.genome").has_value());
}

TEST(Baselines, SpiralRadiusGrowsPerRevolution) {
    const World w = open_world(ScenarioKind::outdoor_rescue, 200);
    auto policy = make_baseline(BaselineKind::spiral_sweep, w);
    RoverState r = spawn_rover(w);
    auto prog = start_episode(w, r);
    double last_radius = 0.0;
    double swept = 0.0, prev_angle = 0.0;
    int revolutions = 0;
    for (int k = 0; k < 6000; ++k) {
        const StepContext ctx{w, r, prog, k * 0.1, k, {}, nullptr};
        r = step(w, r, policy->act(ctx), k * 0.1, prog).first;
        const Vec2 d = r.position - w.spawn;
        const double ang = std::atan2(d.y, d.x);
        if (k > 0) swept += wrap_angle(ang - prev_angle);
        prev_angle = ang;
        if (std::abs(swept) >= 2 * kPi * (revolutions + 1)) {
            ++revolutions;
            const double radius = norm(d);
            EXPECT_GE(radius, last_radius) << "revolution " << revolutions;
            last_radius = radius;
        }
    }
    EXPECT_GE(revolutions, 3);
}

TEST(Baselines, GreedyRoomsSolvesTrivialWorld) {
    World w = open_world(ScenarioKind::indoor_fire, 20);
    w.spawn = {3, 10};
    w.goals.push_back({0, {15, 10}, 1.0, GoalKind::room_zone});
    w.goals.push_back({1, w.spawn, 1.5, GoalKind::home});
    auto policy = make_baseline(BaselineKind::greedy_rooms, w);
    const auto r = run_episode(*policy, w);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.goal_ids, (std::vector<int>{0, 1}));
}

TEST(Baselines, GreedyCheckpointsNearestFirst) {
    World w = open_world(ScenarioKind::industrial_inspect, 100);
    w.spawn = {50, 50};
    const std::vector<Vec2> pts{{80, 50}, {55, 60}, {20, 20}, {50, 30}, {90, 90}};
    for (int i = 0; i < 5; ++i) w.goals.push_back({i, pts[i], 1.5, GoalKind::checkpoint});
    w.goals.push_back({5, w.spawn, 2.0, GoalKind::home});
    w.config.n_targets = 5;
    w.config.episode_limit = 1000.0;

    // Oracle: repeatedly pick the closest remaining checkpoint.
    std::vector<int> want;
    std::vector<char> used(5, 0);
    Vec2 at = w.spawn;
    for (int n = 0; n < 5; ++n) {
        int best = -1;
        for (int i = 0; i < 5; ++i)
            if (!used[i] && (best < 0 || distance(at, pts[i]) < distance(at, pts[best]))) best = i;
        used[best] = 1;
        want.push_back(best);
        at = pts[best];
    }
    want.push_back(5);
    auto policy = make_baseline(BaselineKind::greedy_checkpoints, w);
    const auto r = run_episode(*policy, w);
    EXPECT_EQ(r.goal_ids, want);
    EXPECT_TRUE(r.success);
}

TEST(Baselines, ActionsAlwaysLegal) {
    for (auto kind : {BaselineKind::greedy_rooms, BaselineKind::spiral_sweep, BaselineKind::greedy_checkpoints}) {
        for (std::uint64_t s = 0; s < 3; ++s) {
            auto cfg = kind == BaselineKind::greedy_rooms ? mini_indoor()
                                                          : ScenarioConfig::defaults(ScenarioKind::industrial_inspect);
            if (kind != BaselineKind::greedy_rooms) cfg.arena_size = 60;
            cfg.seed = s;
            const World w = build_scenario(cfg);
            auto policy = make_baseline(kind, w);
            const auto r = run_episode(*policy, w, {true, false});
            for (const auto& a : r.actions) {
                ASSERT_GE(a.v, cfg.allow_reverse ? -1.0 : 0.0);
                ASSERT_LE(a.v, 1.0);
                ASSERT_LE(std::abs(a.omega), 90.0);
            }
        }
    }
}

TEST(Metrics, AllSuccessful) {
    std::vector<EpisodeResult> rs(4);
    for (auto& r : rs) {
        r.success = true;
        r.sim_time = 100.0;
        r.cells_visited = 8;
    }
    const auto m = compute_metrics(rs, 16);
    EXPECT_EQ(m.success_rate, 1.0);
    EXPECT_EQ(m.avg_collisions, 0.0);
    EXPECT_EQ(m.avg_completion_time, 100.0);
    EXPECT_EQ(m.area_explored, 0.5);
}

TEST(Metrics, ThirtyNineOfFifty) {
    std::vector<EpisodeResult> rs(50);
    for (int i = 0; i < 39; ++i) rs[static_cast<std::size_t>(i)].success = true;
    EXPECT_DOUBLE_EQ(compute_metrics(rs, 1).success_rate, 0.78);
}

TEST(Metrics, SingleTrialAndEmpty) {
    EpisodeResult r;
    r.fitness = -42.0;
    r.collisions = 3;
    r.cells_visited = 5;
    r.targets_reached = 2;
    const auto m = compute_metrics(std::span<const EpisodeResult>(&r, 1), 10);
    EXPECT_EQ(m.avg_reward, -42.0);
    EXPECT_EQ(m.avg_collisions, 3.0);
    EXPECT_EQ(m.area_explored, 0.5);
    EXPECT_EQ(m.avg_goals, 2.0);
    EXPECT_FALSE(m.avg_completion_time.has_value());
    EXPECT_THROW(compute_metrics({}, 10), std::invalid_argument);
}

TEST(ActionLog, RoundTripAndTruncation) {
    ActionLog log{ScenarioKind::outdoor_rescue, 991, 3, -12.75, {{0.5, 10.0}, {0.1 + 0.2, -90.0}, {-1.0, 0.0}}};
    std::stringstream ss;
    write_action_log(ss, log);
    const std::string text = ss.str();
    std::istringstream in(text);
    const auto back = read_action_log(in);
    EXPECT_EQ(back.kind, log.kind);
    EXPECT_EQ(back.seed, 991u);
    EXPECT_EQ(back.fitness, -12.75);
    EXPECT_EQ(back.actions, log.actions);

    std::istringstream cut(text.substr(0, text.rfind("a -1")));
    try {
        read_action_log(cut);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 4);
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
    }
}

TEST(Records, JsonAndCsvShapes) {
    EpisodeResult r;
    r.fitness = 12.5;
    r.goal_ids = {1, 2};
    const std::string j = result_json(r, 3);
    EXPECT_NE(j.find("\"trial\":3"), std::string::npos);
    EXPECT_NE(j.find("\"goal_ids\":[1,2]"), std::string::npos);
    EXPECT_NE(j.find("\"breakdown\""), std::string::npos);
    Metrics m;
    m.trials = 2;
    m.success_rate = 0.5;
    const std::string row = metrics_csv_row("greedy_rooms", m);
    EXPECT_EQ(row.rfind("greedy_rooms,2,0.5,", 0), 0u);
    const std::string header = metrics_csv_header();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}
