#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "neatnav/geometry.hpp"
#include "neatnav/network.hpp"

namespace neatnav {

enum class ScenarioKind : std::uint8_t { indoor_fire, outdoor_rescue, industrial_inspect };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view s);

inline constexpr int kLidarBeams = 720;
inline constexpr double kLidarResolutionDeg = 0.5;
inline constexpr double kGoalSensorRange = 5.0;
inline constexpr double kRoverRadius = 0.3;
inline constexpr double kCoverageCell = 5.0;

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::indoor_fire;
    double arena_size = 40.0;     // metres, square arena
    int n_rooms = 8;              // indoor only; includes the hallway
    int n_targets = 5;            // target rooms / survivors / checkpoints
    double lidar_range = 10.0;
    bool allow_reverse = false;
    bool dynamic_obstacles = true;
    double episode_limit = 300.0; // seconds
    double dt = 0.1;
    std::uint64_t seed = 0;
    int n_obstacles = -1;         // rubble piles / structures; -1 derives from area
    // Episode shaping knobs carried with the scenario so an episode is a pure
    // function of (policy, config, seed).
    bool exploration_reward = true;
    int collision_cap = 10;

    static ScenarioConfig defaults(ScenarioKind kind);
    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;
    int step_budget() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Observation layout: 720 lidar, sin/cos heading, (left,right) per target in
/// outdoor and industrial scenarios, hazard level in outdoor only.
int observation_width(const ScenarioConfig& config);
int observation_width(ScenarioKind kind, int n_targets);

enum class GoalKind : std::uint8_t { room_zone, survivor, checkpoint, home };
std::string_view to_string(GoalKind kind);

struct Goal {
    int id = 0;
    Vec2 position;
    double radius = 1.0;
    GoalKind kind = GoalKind::room_zone;
};

/// Closed piecewise-linear loop traversed at constant speed; position is a
/// pure function of time. A single waypoint or zero speed means static.
struct PathLoop {
    std::vector<Vec2> waypoints;
    double speed = 0.0;
    double phase = 0.0;  // seconds of travel already done at t = 0

    Vec2 at(double t) const;
    double length() const;
};

/// On/off duty cycle. period <= 0 means always on.
struct Schedule {
    double period = 0.0;
    double on_fraction = 1.0;
    double phase = 0.0;

    bool active(double t) const;
};

/// Solid convex shape that moves along a path and/or switches on and off.
struct MovingObstacle {
    Polygon shape;  // relative to the path position
    PathLoop path;
    Schedule schedule;

    bool active(double t) const { return schedule.active(t); }
    Polygon at(double t) const { return translated(shape, path.at(t)); }
};

struct Hazard {
    Polygon shape;  // relative to the path position
    PathLoop path;
    double intensity = 1.0;

    Polygon at(double t) const { return translated(shape, path.at(t)); }
};

struct World {
    ScenarioConfig config;
    double width = 0.0;
    double height = 0.0;
    std::vector<Segment> walls;        // every static segment, obstacle edges included
    std::vector<Polygon> obstacles;    // static solid polygons
    std::vector<MovingObstacle> movers;
    std::vector<Hazard> hazards;
    std::vector<Goal> goals;           // home, if any, is last
    Vec2 spawn;
    double spawn_heading = 0.0;
    int cells_x = 0;
    int cells_y = 0;

    int total_cells() const { return cells_x * cells_y; }
    /// Coverage cell index of a point (clamped into the arena).
    int cell_index(Vec2 p) const;
    /// Goals other than home.
    int target_count() const;
    bool has_home() const { return !goals.empty() && goals.back().kind == GoalKind::home; }

    /// Static segments plus edges of movers active at time t.
    void segments_at(double t, std::vector<Segment>& out) const;
    std::vector<Segment> segments_at(double t) const;
    /// Polygons of movers active at time t.
    std::vector<Polygon> movers_at(double t) const;
    double hazard_level(Vec2 p, double t) const;
};

struct RoverState {
    Vec2 position;
    double heading = 0.0;  // (-pi, pi]
    double radius = kRoverRadius;

    friend bool operator==(const RoverState&, const RoverState&) = default;
};

/// Per-episode bookkeeping that the world itself does not hold.
struct EpisodeProgress {
    std::vector<char> goal_done;
    std::vector<char> cell_visited;
    int goals_done = 0;
    int targets_done = 0;
    int cells_visited = 0;

    bool all_targets_done(const World& world) const {
        return targets_done == world.target_count();
    }
    bool finished(const World& world) const {
        return goals_done == static_cast<int>(world.goals.size());
    }
};

struct StepEvents {
    bool collision = false;
    std::optional<int> goal_reached;
    GoalKind goal_kind = GoalKind::room_zone;
    double hazard_exposure = 0.0;
    bool new_cell = false;
    double distance_moved = 0.0;
};

/// Seeded procedural layout. Retries with derived seeds until every goal is
/// reachable; throws GenerationError after 20 failures.
World build_scenario(const ScenarioConfig& config);

RoverState spawn_rover(const World& world);
/// Fresh progress with the spawn cell already marked visited.
EpisodeProgress start_episode(const World& world, const RoverState& rover);

/// Advance one control step from time t to t + dt.
std::pair<RoverState, StepEvents> step(const World& world, const RoverState& rover,
                                       const ActionCommand& action, double t,
                                       EpisodeProgress& progress);

/// Distance to the nearest static or active dynamic surface at time t, capped at max_range.
double raycast(const World& world, Vec2 origin, double angle, double max_range, double t);
double raycast(std::span<const Segment> segments, Vec2 origin, Vec2 dir, double max_range);

/// Reusable buffers for sense().
struct SenseScratch {
    std::vector<Segment> segments;
    std::vector<Vec2> beam_dirs;
    std::vector<double> ranges;
};

/// Full 720-beam scan in metres, beam k at heading + k * 0.5 degrees.
void lidar_scan(std::span<const Segment> segments, Vec2 origin, double heading, double max_range,
                SenseScratch& scratch, std::span<double> ranges);

std::vector<double> sense(const World& world, const RoverState& rover, double t,
                          const EpisodeProgress& progress);
void sense(const World& world, const RoverState& rover, double t, const EpisodeProgress& progress,
           SenseScratch& scratch, std::vector<double>& out);

/// Smallest clearance between the rover disc and any solid geometry at time t;
/// negative means overlap.
double clearance(const World& world, Vec2 position, double radius, double t);

}  // namespace neatnav
