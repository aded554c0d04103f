#include <gtest/gtest.h>

#include <functional>

#include "neatnav/config.hpp"
#include "neatnav/errors.hpp"

using namespace neatnav;

namespace {

int error_line(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const FormatError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST(ScenarioFile, KindSetsDefaultsBeforeOverrides) {
    const auto c = parse_scenario_config("arena_size = 60\n# comment\nkind = outdoor_rescue\nn_survivors = 3\n");
    EXPECT_EQ(c.kind, ScenarioKind::outdoor_rescue);
    EXPECT_EQ(c.arena_size, 60.0);
    EXPECT_EQ(c.n_targets, 3);
    EXPECT_EQ(c.lidar_range, 20.0);
    EXPECT_TRUE(c.allow_reverse);
}

TEST(ScenarioFile, RoundTrip) {
    auto c = ScenarioConfig::defaults(ScenarioKind::industrial_inspect);
    c.seed = 123;
    c.dynamic_obstacles = false;
    c.exploration_reward = false;
    c.episode_limit = 120;
    EXPECT_EQ(parse_scenario_config(to_text(c)), c);
}

TEST(ScenarioFile, ErrorsNameLineAndKey) {
    EXPECT_EQ(error_line([] { parse_scenario_config("kind = indoor_fire\narena_size = big\n"); }), 2);
    EXPECT_EQ(error_line([] { parse_scenario_config("\n\nwarp_drive = on\n"); }), 3);
    EXPECT_EQ(error_line([] { parse_scenario_config("seed = 1\nseed = 2\n"); }), 2);
    EXPECT_EQ(error_line([] { parse_scenario_config("no equals sign\n"); }), 1);
    try {
        parse_scenario_config("kind = indoor_fire\nallow_reverse = maybe\n");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("allow_reverse"), std::string::npos);
    }
}

TEST(ScenarioFile, InvalidCombinationRejected) {
    EXPECT_THROW(parse_scenario_config("episode_limit = 10.05\n"), FormatError);
    EXPECT_THROW(parse_scenario_config("n_rooms = 3\nn_targets = 3\n"), FormatError);
}

TEST(TrainingFile, DefaultsMatchLibrary) {
    const auto tc = parse_training_config("");
    EXPECT_EQ(tc.evolve.pop_size, 100);
    EXPECT_EQ(tc.evolve.mutation, MutationParams{});
    EXPECT_EQ(tc.episodes_per_genome, 1);
    EXPECT_EQ(tc.seed_mode, SeedMode::per_genome);
}

TEST(TrainingFile, ScheduleInheritsBaseSettings) {
    const auto tc = parse_training_config(
        "schedule = 120-140:conn_add_prob=0.6\nweight_mutate_power = 0.3\nfitness_criterion = max\n");
    ASSERT_EQ(tc.evolve.mutation_schedule.size(), 1u);
    const auto& e = tc.evolve.mutation_schedule[0];
    EXPECT_EQ(e.first, 120);
    EXPECT_EQ(e.last, 140);
    EXPECT_EQ(e.params.conn_add_prob, 0.6);
    EXPECT_EQ(e.params.weight_mutate_power, 0.3);
    EXPECT_EQ(tc.evolve.mutation.conn_add_prob, 0.5);
}

TEST(TrainingFile, RoundTrip) {
    auto tc = parse_training_config(
        "pop_size = 50\nseed_mode = fixed\nepisodes_per_genome = 3\nschedule = 5-9:node_add_prob=0.4\n"
        "weight_init_min = -0.5\nweight_init_max = 0.5\n");
    const auto back = parse_training_config(to_text(tc));
    EXPECT_EQ(back.evolve.pop_size, 50);
    EXPECT_EQ(back.evolve.mutation, tc.evolve.mutation);
    EXPECT_EQ(back.evolve.mutation_schedule, tc.evolve.mutation_schedule);
    EXPECT_EQ(back.seed_mode, SeedMode::fixed);
    EXPECT_EQ(back.episodes_per_genome, 3);
}

TEST(TrainingFile, BadValues) {
    EXPECT_EQ(error_line([] { parse_training_config("conn_add_prob = 1.5\n"); }), 1);
    EXPECT_EQ(error_line([] { parse_training_config("pop_size = 10\nfitness_criterion = min\n"); }), 2);
    EXPECT_EQ(error_line([] { parse_training_config("\nschedule = 9-5:conn_add_prob=0.6\n"); }), 2);
    EXPECT_THROW(parse_training_config("pop_size = 2\nelitism = 3\n"), FormatError);
}

TEST(Files, MissingFileReportsPath) {
    try {
        load_scenario_config("/nonexistent/scenario.cfg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/scenario.cfg"), std::string::npos);
    }
}
