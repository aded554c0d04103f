#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "neatnav/world.hpp"

namespace neatnav {

struct RewardConstants {
    double goal_room = 1000.0;
    double goal_home = 2000.0;
    double goal_survivor = 1000.0;
    double goal_checkpoint = 500.0;
    double new_cell = 10.0;
    double time_penalty = -1.0;    // per second
    double distance_cost = -0.5;   // per metre
    double collision = -500.0;
    double hazard = -300.0;        // once per continuous entry
    double stagnation = -100.0;

    /// Home pays only indoors; outdoor and industrial runs track it as a success condition.
    static RewardConstants for_scenario(ScenarioKind kind, bool exploration_reward = true);
    double goal_reward(GoalKind kind) const;
    /// Throws std::invalid_argument if a penalty is positive or a reward negative.
    void validate() const;
};

struct RewardBreakdown {
    double goals = 0.0;
    double exploration = 0.0;
    double time = 0.0;
    double distance = 0.0;
    double collision = 0.0;
    double hazard = 0.0;
    double stagnation = 0.0;

    /// Components summed in declaration order; the ledger total is defined by this.
    double sum() const {
        return goals + exploration + time + distance + collision + hazard + stagnation;
    }
    friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

struct RewardLedger {
    RewardBreakdown parts;
    double total = 0.0;
    std::vector<int> goal_ids;  // in collection order
    int cells_visited = 1;      // the spawn cell counts
    int collisions = 0;
    int hazard_entries = 0;
    bool in_hazard = false;
    bool stagnated = false;

    bool has_goal(int id) const;
};

/// Adds one step's events to the ledger and returns that step's reward.
double accumulate(RewardLedger& ledger, const StepEvents& events, const RewardConstants& constants,
                  double dt);

/// Displacement-over-window stuck detector.
class StagnationMonitor {
public:
    explicit StagnationMonitor(double window = 5.0, double min_displacement = 0.5)
        : window_(window), min_displacement_(min_displacement) {}

    void record(double t, Vec2 position, bool goal_event = false);
    /// Never fires before a full window of history exists.
    bool check(double now) const;
    /// Time between oldest and newest buffered samples.
    double span() const;
    std::size_t size() const { return buffer_.size(); }

private:
    struct Sample {
        double t;
        Vec2 p;
    };
    double window_;
    double min_displacement_;
    std::deque<Sample> buffer_;
    std::optional<double> last_goal_;
};

struct FitnessResult {
    double fitness = 0.0;
    RewardBreakdown breakdown;
};

/// Applies the one-time stagnation penalty when `stagnated` and reports the total.
FitnessResult finalize(RewardLedger& ledger, bool stagnated, const RewardConstants& constants);

}  // namespace neatnav
