#include "neatnav/fitness.hpp"

#include <algorithm>
#include <stdexcept>

namespace neatnav {

RewardConstants RewardConstants::for_scenario(ScenarioKind kind, bool exploration_reward) {
    RewardConstants c;
    if (kind != ScenarioKind::indoor_fire) c.goal_home = 0.0;
    if (!exploration_reward) c.new_cell = 0.0;
    return c;
}

double RewardConstants::goal_reward(GoalKind kind) const {
    switch (kind) {
        case GoalKind::room_zone: return goal_room;
        case GoalKind::survivor: return goal_survivor;
        case GoalKind::checkpoint: return goal_checkpoint;
        case GoalKind::home: return goal_home;
    }
    return 0.0;
}

void RewardConstants::validate() const {
    for (double r : {goal_room, goal_home, goal_survivor, goal_checkpoint, new_cell})
        if (r < 0.0) throw std::invalid_argument("reward constants must be non-negative");
    for (double p : {time_penalty, distance_cost, collision, hazard, stagnation})
        if (p > 0.0) throw std::invalid_argument("penalty constants must be non-positive");
}

bool RewardLedger::has_goal(int id) const {
    return std::find(goal_ids.begin(), goal_ids.end(), id) != goal_ids.end();
}

double accumulate(RewardLedger& ledger, const StepEvents& ev, const RewardConstants& k, double dt) {
    auto& p = ledger.parts;
    double step = 0.0;
    if (ev.goal_reached && !ledger.has_goal(*ev.goal_reached)) {
        ledger.goal_ids.push_back(*ev.goal_reached);
        const double r = k.goal_reward(ev.goal_kind);
        p.goals += r;
        step += r;
    }
    if (ev.new_cell) {
        ++ledger.cells_visited;
        p.exploration += k.new_cell;
        step += k.new_cell;
    }
    const double time = k.time_penalty * dt;
    p.time += time;
    step += time;
    const double dist = k.distance_cost * ev.distance_moved;
    p.distance += dist;
    step += dist;
    if (ev.collision) {
        ++ledger.collisions;
        p.collision += k.collision;
        step += k.collision;
    }
    const bool inside = ev.hazard_exposure > 0.0;
    if (inside && !ledger.in_hazard) {
        ++ledger.hazard_entries;
        p.hazard += k.hazard;
        step += k.hazard;
    }
    ledger.in_hazard = inside;
    ledger.total = p.sum();
    return step;
}

void StagnationMonitor::record(double t, Vec2 position, bool goal_event) {
    buffer_.push_back({t, position});
    if (goal_event) last_goal_ = t;
    // Keep exactly one window: the oldest sample sits at or after t - window.
    constexpr double eps = 1e-9;
    while (buffer_.size() > 1 && buffer_.front().t < t - window_ - eps) buffer_.pop_front();
}

bool StagnationMonitor::check(double now) const {
    if (buffer_.empty()) return false;
    constexpr double eps = 1e-9;
    const Sample& oldest = buffer_.front();
    const Sample& newest = buffer_.back();
    if (now - oldest.t < window_ - eps) return false;
    if (last_goal_ && *last_goal_ >= oldest.t - eps) return false;
    return distance(oldest.p, newest.p) < min_displacement_;
}

double StagnationMonitor::span() const {
    return buffer_.empty() ? 0.0 : buffer_.back().t - buffer_.front().t;
}

FitnessResult finalize(RewardLedger& ledger, bool stagnated, const RewardConstants& k) {
    if (stagnated && !ledger.stagnated) {
        ledger.stagnated = true;
        ledger.parts.stagnation += k.stagnation;
        ledger.total = ledger.parts.sum();
    }
    return {ledger.total, ledger.parts};
}

}  // namespace neatnav
