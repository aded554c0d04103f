#include <gtest/gtest.h>

#include <cmath>

#include "neatnav/fitness.hpp"
#include "neatnav/random.hpp"

using namespace neatnav;

namespace {

StepEvents moved(double d) {
    StepEvents e;
    e.distance_moved = d;
    return e;
}

StepEvents random_event(Random& rng, int& next_goal) {
    StepEvents e;
    e.distance_moved = rng.uniform(0.0, 0.1);
    e.collision = rng.chance(0.05);
    e.new_cell = rng.chance(0.1);
    e.hazard_exposure = rng.chance(0.2) ? rng.uniform(0.1, 1.0) : 0.0;
    if (rng.chance(0.02)) {
        e.goal_reached = rng.chance(0.3) && next_goal > 0 ? next_goal - 1 : next_goal++;
        e.goal_kind = static_cast<GoalKind>(rng.index(4));
    }
    return e;
}

}  // namespace

TEST(RewardConstants, DefaultsAndScenarioOverrides) {
    const RewardConstants k;
    EXPECT_EQ(k.goal_room, 1000.0);
    EXPECT_EQ(k.goal_home, 2000.0);
    EXPECT_EQ(k.goal_survivor, 1000.0);
    EXPECT_EQ(k.goal_checkpoint, 500.0);
    EXPECT_EQ(k.new_cell, 10.0);
    EXPECT_EQ(k.time_penalty, -1.0);
    EXPECT_EQ(k.distance_cost, -0.5);
    EXPECT_EQ(k.collision, -500.0);
    EXPECT_EQ(k.hazard, -300.0);
    EXPECT_EQ(k.stagnation, -100.0);
    EXPECT_NO_THROW(k.validate());
    EXPECT_EQ(RewardConstants::for_scenario(ScenarioKind::outdoor_rescue).goal_home, 0.0);
    EXPECT_EQ(RewardConstants::for_scenario(ScenarioKind::industrial_inspect).goal_home, 0.0);
    EXPECT_EQ(RewardConstants::for_scenario(ScenarioKind::indoor_fire, false).new_cell, 0.0);
    RewardConstants bad;
    bad.collision = 5.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Accumulate, TimeAndDistance) {
    RewardLedger l;
    EXPECT_DOUBLE_EQ(accumulate(l, moved(0.08), RewardConstants{}, 0.1), -0.14);
    EXPECT_EQ(l.total, l.parts.sum());
}

TEST(Accumulate, NewCell) {
    RewardLedger l;
    StepEvents e = moved(0.08);
    e.new_cell = true;
    EXPECT_DOUBLE_EQ(accumulate(l, e, RewardConstants{}, 0.1), 9.86);
    EXPECT_EQ(l.cells_visited, 2);
}

TEST(Accumulate, SurvivorReached) {
    RewardLedger l;
    StepEvents e;
    e.goal_reached = 2;
    e.goal_kind = GoalKind::survivor;
    const auto k = RewardConstants::for_scenario(ScenarioKind::outdoor_rescue);
    EXPECT_DOUBLE_EQ(accumulate(l, e, k, 0.1), 999.9);
    // A second report of the same goal pays nothing.
    EXPECT_DOUBLE_EQ(accumulate(l, e, k, 0.1), -0.1);
    EXPECT_EQ(l.goal_ids, std::vector<int>{2});
}

TEST(Accumulate, CollisionIsPenalisedPerEvent) {
    RewardLedger l;
    StepEvents e;
    e.collision = true;
    accumulate(l, e, RewardConstants{}, 0.1);
    accumulate(l, e, RewardConstants{}, 0.1);
    EXPECT_EQ(l.collisions, 2);
    EXPECT_EQ(l.parts.collision, -1000.0);
}

TEST(Accumulate, HazardOncePerEntry) {
    RewardLedger l;
    StepEvents in;
    in.hazard_exposure = 0.7;
    const StepEvents out;
    for (int i = 0; i < 5; ++i) accumulate(l, in, RewardConstants{}, 0.1);
    accumulate(l, out, RewardConstants{}, 0.1);
    accumulate(l, in, RewardConstants{}, 0.1);
    EXPECT_EQ(l.hazard_entries, 2);
    EXPECT_EQ(l.parts.hazard, -600.0);
}

TEST(Ledger, ConservationAndReplay) {
    Random rng(1);
    const RewardConstants k;
    std::vector<StepEvents> events;
    int next_goal = 0;
    for (int i = 0; i < 3000; ++i) events.push_back(random_event(rng, next_goal));
    RewardLedger l;
    for (const auto& e : events) {
        accumulate(l, e, k, 0.1);
        ASSERT_EQ(l.total, l.parts.sum());
    }
    const auto stored = finalize(l, true, k);
    RewardLedger again;
    for (const auto& e : events) accumulate(again, e, k, 0.1);
    EXPECT_EQ(finalize(again, true, k).fitness, stored.fitness);
    EXPECT_EQ(stored.breakdown.sum(), stored.fitness);
}

TEST(Ledger, ExplorationToggleLeavesOtherComponents) {
    Random rng(2);
    std::vector<StepEvents> events;
    int next_goal = 0;
    for (int i = 0; i < 2000; ++i) events.push_back(random_event(rng, next_goal));
    RewardLedger with, without;
    const auto k1 = RewardConstants::for_scenario(ScenarioKind::indoor_fire, true);
    const auto k0 = RewardConstants::for_scenario(ScenarioKind::indoor_fire, false);
    for (const auto& e : events) {
        accumulate(with, e, k1, 0.1);
        accumulate(without, e, k0, 0.1);
    }
    EXPECT_EQ(with.parts.goals, without.parts.goals);
    EXPECT_EQ(with.parts.collision, without.parts.collision);
    EXPECT_EQ(without.parts.exploration, 0.0);
    EXPECT_GT(with.parts.exploration, 0.0);
}

TEST(Ledger, ExplorationBoundedByCells) {
    // The world only reports new_cell on first entry; with 64 cells at most 63 fire.
    RewardLedger l;
    StepEvents e;
    e.new_cell = true;
    for (int i = 0; i < 63; ++i) accumulate(l, e, RewardConstants{}, 0.1);
    EXPECT_LE(l.parts.exploration, 10.0 * 64);
}

TEST(Finalize, StagnationAppliedOnce) {
    RewardLedger l;
    for (int i = 0; i < 50; ++i) accumulate(l, StepEvents{}, RewardConstants{}, 0.1);
    auto r = finalize(l, true, RewardConstants{});
    r = finalize(l, true, RewardConstants{});
    EXPECT_DOUBLE_EQ(r.fitness, -105.0);
    EXPECT_EQ(r.breakdown.stagnation, -100.0);
    EXPECT_EQ(r.breakdown.sum(), r.fitness);
}

TEST(Finalize, PerfectIndoorRunIsSevenThousand) {
    RewardLedger l;
    RewardConstants k;
    k.time_penalty = 0.0;
    for (int g = 0; g < 6; ++g) {
        StepEvents e;
        e.goal_reached = g;
        e.goal_kind = g < 5 ? GoalKind::room_zone : GoalKind::home;
        accumulate(l, e, k, 0.1);
    }
    EXPECT_EQ(finalize(l, false, k).fitness, 7000.0);
}

TEST(Finalize, AllSurvivorsIsFourThousand) {
    RewardLedger l;
    RewardConstants k = RewardConstants::for_scenario(ScenarioKind::outdoor_rescue);
    k.time_penalty = 0.0;
    for (int g = 0; g < 4; ++g) {
        StepEvents e;
        e.goal_reached = g;
        e.goal_kind = GoalKind::survivor;
        accumulate(l, e, k, 0.1);
    }
    EXPECT_EQ(finalize(l, false, k).fitness, 4000.0);
}

TEST(Stagnation, MovingRoverNeverStuck) {
    StagnationMonitor m;
    for (int i = 1; i <= 100; ++i) {
        m.record(i * 0.1, {i * 0.1, 0.0});
        ASSERT_FALSE(m.check(i * 0.1));
    }
}

TEST(Stagnation, SpinningInPlaceFires) {
    StagnationMonitor m;
    m.record(0.0, {1.0, 1.0});
    bool fired = false;
    double when = 0.0;
    for (int i = 1; i <= 60 && !fired; ++i) {
        m.record(i * 0.1, {1.0, 1.0});
        if (m.check(i * 0.1)) {
            fired = true;
            when = i * 0.1;
        }
    }
    EXPECT_TRUE(fired);
    EXPECT_NEAR(when, 5.0, 1e-9);
}

TEST(Stagnation, NeverBeforeFullWindow) {
    StagnationMonitor m;
    for (int i = 0; i < 49; ++i) {
        m.record(i * 0.1, {0.0, 0.0});
        ASSERT_FALSE(m.check(i * 0.1));
    }
}

TEST(Stagnation, RecentGoalSuppresses) {
    StagnationMonitor m;
    for (int i = 0; i <= 80; ++i) {
        const double t = i * 0.1;
        const double a = t * 3.0;
        m.record(t, {0.05 * std::cos(a), 0.05 * std::sin(a)}, i == 60);
    }
    EXPECT_FALSE(m.check(8.0));  // goal 2 s ago
}

TEST(Stagnation, WindowBounded) {
    StagnationMonitor m;
    for (int i = 0; i < 500; ++i) {
        m.record(i * 0.1, {0.0, i * 0.3});
        ASSERT_LE(m.span(), 5.0 + 1e-9);
    }
}
