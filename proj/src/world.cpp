#include "neatnav/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "neatnav/errors.hpp"
#include "neatnav/random.hpp"

namespace neatnav {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr int kMaxGenerationAttempts = 20;

}  // namespace

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::indoor_fire: return "indoor_fire";
        case ScenarioKind::outdoor_rescue: return "outdoor_rescue";
        case ScenarioKind::industrial_inspect: return "industrial_inspect";
    }
    return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
    if (s == "indoor_fire" || s == "A" || s == "a") return ScenarioKind::indoor_fire;
    if (s == "outdoor_rescue" || s == "B" || s == "b") return ScenarioKind::outdoor_rescue;
    if (s == "industrial_inspect" || s == "C" || s == "c") return ScenarioKind::industrial_inspect;
    return std::nullopt;
}

std::string_view to_string(GoalKind kind) {
    switch (kind) {
        case GoalKind::room_zone: return "room_zone";
        case GoalKind::survivor: return "survivor";
        case GoalKind::checkpoint: return "checkpoint";
        case GoalKind::home: return "home";
    }
    return "?";
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) {
    ScenarioConfig c;
    c.kind = kind;
    switch (kind) {
        case ScenarioKind::indoor_fire:
            c.arena_size = 40.0;
            c.n_rooms = 8;
            c.n_targets = 5;
            c.lidar_range = 10.0;
            c.allow_reverse = false;
            break;
        case ScenarioKind::outdoor_rescue:
            c.arena_size = 100.0;
            c.n_targets = 4;
            c.lidar_range = 20.0;
            c.allow_reverse = true;
            break;
        case ScenarioKind::industrial_inspect:
            c.arena_size = 200.0;
            c.n_targets = 5;
            c.lidar_range = 20.0;
            c.allow_reverse = true;
            break;
    }
    return c;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(episode_limit > 0.0)) fail("episode_limit must be positive");
    const double steps = episode_limit / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps))
        fail("episode_limit / dt must be a whole number of steps");
    if (!(lidar_range > 0.0)) fail("lidar_range must be positive");
    if (n_targets < 1) fail("n_targets must be at least 1");
    if (collision_cap < 1) fail("collision_cap must be at least 1");
    if (kind == ScenarioKind::indoor_fire) {
        if (n_rooms < 2) fail("n_rooms must be at least 2 (hallway plus one room)");
        if (n_targets > n_rooms - 1) fail("n_targets cannot exceed the number of rooms off the hallway");
        const int per_row = (n_rooms - 1 + 1) / 2;
        if (arena_size < 8.0 || arena_size / per_row < 3.5)
            fail("arena_size too small for the requested rooms");
    } else {
        if (arena_size < 20.0) fail("arena_size must be at least 20 m");
    }
}

int ScenarioConfig::step_budget() const {
    return static_cast<int>(std::llround(episode_limit / dt));
}

int observation_width(ScenarioKind kind, int n_targets) {
    switch (kind) {
        case ScenarioKind::indoor_fire: return kLidarBeams + 2;
        case ScenarioKind::outdoor_rescue: return kLidarBeams + 2 + 2 * n_targets + 1;
        case ScenarioKind::industrial_inspect: return kLidarBeams + 2 + 2 * n_targets;
    }
    return kLidarBeams + 2;
}

int observation_width(const ScenarioConfig& config) {
    return observation_width(config.kind, config.n_targets);
}

// ---------------------------------------------------------------------------
// Moving obstacle paths

double PathLoop::length() const {
    const std::size_t n = waypoints.size();
    if (n < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += distance(waypoints[i], waypoints[(i + 1) % n]);
    return len;
}

Vec2 PathLoop::at(double t) const {
    if (waypoints.empty()) return {};
    const double len = length();
    if (waypoints.size() < 2 || speed <= 0.0 || len <= 0.0) return waypoints.front();
    double s = std::fmod(speed * (t + phase), len);
    if (s < 0.0) s += len;
    const std::size_t n = waypoints.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = waypoints[i];
        const Vec2 b = waypoints[(i + 1) % n];
        const double d = distance(a, b);
        if (s <= d && d > 0.0) return a + (b - a) * (s / d);
        s -= d;
    }
    return waypoints.front();
}

bool Schedule::active(double t) const {
    if (period <= 0.0) return true;
    double u = std::fmod(t + phase, period);
    if (u < 0.0) u += period;
    return u < on_fraction * period;
}

// ---------------------------------------------------------------------------
// World queries

int World::cell_index(Vec2 p) const {
    const int cx = std::clamp(static_cast<int>(std::floor(p.x / kCoverageCell)), 0, cells_x - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(p.y / kCoverageCell)), 0, cells_y - 1);
    return cy * cells_x + cx;
}

int World::target_count() const {
    return static_cast<int>(goals.size()) - (has_home() ? 1 : 0);
}

void World::segments_at(double t, std::vector<Segment>& out) const {
    out.assign(walls.begin(), walls.end());
    for (const auto& m : movers)
        if (m.active(t)) append_edges(m.at(t), out);
}

std::vector<Segment> World::segments_at(double t) const {
    std::vector<Segment> out;
    segments_at(t, out);
    return out;
}

std::vector<Polygon> World::movers_at(double t) const {
    std::vector<Polygon> out;
    for (const auto& m : movers)
        if (m.active(t)) out.push_back(m.at(t));
    return out;
}

double World::hazard_level(Vec2 p, double t) const {
    double level = 0.0;
    for (const auto& h : hazards)
        if (contains(h.at(t), p)) level = std::max(level, h.intensity);
    return level;
}

namespace {

/// Signed distance from p to a convex polygon boundary; negative inside.
double signed_distance(const Polygon& poly, Vec2 p) {
    const std::size_t n = poly.size();
    double d = kInf;
    for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, point_segment_distance(p, {poly[i], poly[(i + 1) % n]}));
    return contains(poly, p) ? -d : d;
}

/// Rover-centred clearance against static walls and polygons plus active movers.
double clearance_impl(const World& w, Vec2 p, double r, std::span<const Polygon> movers) {
    double c = kInf;
    for (const auto& s : w.walls) {
        // Cheap reject: both endpoints on one side far beyond the current best.
        const double lim = c + r;
        if ((s.a.x - p.x > lim && s.b.x - p.x > lim) || (p.x - s.a.x > lim && p.x - s.b.x > lim) ||
            (s.a.y - p.y > lim && s.b.y - p.y > lim) || (p.y - s.a.y > lim && p.y - s.b.y > lim))
            continue;
        c = std::min(c, point_segment_distance(p, s) - r);
    }
    for (const auto& poly : w.obstacles)
        if (contains(poly, p)) c = std::min(c, signed_distance(poly, p) - r);
    for (const auto& poly : movers) c = std::min(c, signed_distance(poly, p) - r);
    return c;
}

}  // namespace

double clearance(const World& world, Vec2 position, double radius, double t) {
    const auto movers = world.movers_at(t);
    return clearance_impl(world, position, radius, movers);
}

// ---------------------------------------------------------------------------
// Raycasting

double raycast(std::span<const Segment> segments, Vec2 origin, Vec2 dir, double max_range) {
    double best = max_range;
    for (const auto& s : segments) best = std::min(best, ray_segment(origin, dir, s));
    return best;
}

double raycast(const World& world, Vec2 origin, double angle, double max_range, double t) {
    const auto segs = world.segments_at(t);
    return raycast(segs, origin, {std::cos(angle), std::sin(angle)}, max_range);
}

namespace {

const std::array<Vec2, kLidarBeams>& beam_table() {
    static const std::array<Vec2, kLidarBeams> table = [] {
        std::array<Vec2, kLidarBeams> out{};
        for (int k = 0; k < kLidarBeams; ++k) {
            const double a = k * kLidarResolutionDeg * kDeg;
            out[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
        }
        return out;
    }();
    return table;
}

}  // namespace

void lidar_scan(std::span<const Segment> segments, Vec2 origin, double heading, double max_range,
                SenseScratch& scratch, std::span<double> ranges) {
    if (ranges.size() != static_cast<std::size_t>(kLidarBeams))
        throw DimensionError("lidar scan needs " + std::to_string(kLidarBeams) + " slots");
    const auto& table = beam_table();
    const double ch = std::cos(heading);
    const double sh = std::sin(heading);
    auto& dirs = scratch.beam_dirs;
    dirs.resize(kLidarBeams);
    for (int k = 0; k < kLidarBeams; ++k) {
        const Vec2 b = table[static_cast<std::size_t>(k)];
        dirs[static_cast<std::size_t>(k)] = {b.x * ch - b.y * sh, b.x * sh + b.y * ch};
    }
    std::fill(ranges.begin(), ranges.end(), max_range);

    const double step = kLidarResolutionDeg * kDeg;
    for (const auto& s : segments) {
        const double lim = max_range;
        if ((s.a.x - origin.x > lim && s.b.x - origin.x > lim) ||
            (origin.x - s.a.x > lim && origin.x - s.b.x > lim) ||
            (s.a.y - origin.y > lim && s.b.y - origin.y > lim) ||
            (origin.y - s.a.y > lim && origin.y - s.b.y > lim))
            continue;
        const double d = point_segment_distance(origin, s);
        if (d >= max_range) continue;
        int k0 = 0;
        int count = kLidarBeams;
        if (d > 1e-9) {
            const Vec2 ra = s.a - origin;
            const Vec2 rb = s.b - origin;
            double start = std::atan2(ra.y, ra.x) - heading;
            double span = wrap_angle(std::atan2(rb.y, rb.x) - std::atan2(ra.y, ra.x));
            if (span < 0.0) {
                start += span;
                span = -span;
            }
            start = std::fmod(start, 2.0 * kPi);
            if (start < 0.0) start += 2.0 * kPi;
            k0 = static_cast<int>(std::floor(start / step)) - 1;
            const int k1 = static_cast<int>(std::ceil((start + span) / step)) + 1;
            count = std::min(k1 - k0 + 1, kLidarBeams);
        }
        for (int i = 0; i < count; ++i) {
            int k = (k0 + i) % kLidarBeams;
            if (k < 0) k += kLidarBeams;
            const auto ku = static_cast<std::size_t>(k);
            const double hit = ray_segment(origin, dirs[ku], s);
            if (hit < ranges[ku]) ranges[ku] = hit;
        }
    }
}

void sense(const World& world, const RoverState& rover, double t, const EpisodeProgress& progress,
           SenseScratch& scratch, std::vector<double>& out) {
    const double range = world.config.lidar_range;
    out.resize(static_cast<std::size_t>(observation_width(world.config)));
    world.segments_at(t, scratch.segments);
    lidar_scan(scratch.segments, rover.position, rover.heading, range, scratch,
               std::span<double>(out.data(), kLidarBeams));
    for (int k = 0; k < kLidarBeams; ++k) out[static_cast<std::size_t>(k)] /= range;
    std::size_t i = kLidarBeams;
    out[i++] = std::sin(rover.heading);
    out[i++] = std::cos(rover.heading);
    if (world.config.kind == ScenarioKind::indoor_fire) return;

    for (int g = 0; g < world.config.n_targets; ++g) {
        double left = 0.0;
        double right = 0.0;
        if (g < world.target_count() && !progress.goal_done[static_cast<std::size_t>(g)]) {
            const Vec2 rel = world.goals[static_cast<std::size_t>(g)].position - rover.position;
            if (norm(rel) <= kGoalSensorRange) {
                const double bearing = wrap_angle(std::atan2(rel.y, rel.x) - rover.heading);
                if (bearing > 0.0 && bearing < kPi) left = 1.0;
                else if (bearing < 0.0 && bearing > -kPi) right = 1.0;
            }
        }
        out[i++] = left;
        out[i++] = right;
    }
    if (world.config.kind == ScenarioKind::outdoor_rescue)
        out[i++] = world.hazard_level(rover.position, t);
}

std::vector<double> sense(const World& world, const RoverState& rover, double t,
                          const EpisodeProgress& progress) {
    SenseScratch scratch;
    std::vector<double> out;
    sense(world, rover, t, progress, scratch, out);
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics

RoverState spawn_rover(const World& world) {
    RoverState r;
    r.position = world.spawn;
    r.heading = wrap_angle(world.spawn_heading);
    return r;
}

EpisodeProgress start_episode(const World& world, const RoverState& rover) {
    EpisodeProgress p;
    p.goal_done.assign(world.goals.size(), 0);
    p.cell_visited.assign(static_cast<std::size_t>(world.total_cells()), 0);
    p.cell_visited[static_cast<std::size_t>(world.cell_index(rover.position))] = 1;
    p.cells_visited = 1;
    return p;
}

namespace {

/// Push the disc out of moving polygons, then out of static walls. Returns
/// true if any moving polygon had to displace the rover.
bool resolve_push(const World& w, std::span<const Polygon> movers, Vec2& p, double r) {
    bool pushed = false;
    constexpr double eps = 1e-9;
    for (int iter = 0; iter < 8; ++iter) {
        bool moved = false;
        for (const auto& poly : movers) {
            const double sd = signed_distance(poly, p);
            if (sd >= r) continue;
            // Nearest boundary point gives the minimum translation direction.
            Vec2 best{};
            double best_d = kInf;
            for (std::size_t i = 0; i < poly.size(); ++i) {
                const Vec2 q = closest_point(p, {poly[i], poly[(i + 1) % poly.size()]});
                const double d = distance(p, q);
                if (d < best_d) {
                    best_d = d;
                    best = q;
                }
            }
            Vec2 dir;
            if (best_d > 1e-12) {
                dir = (p - best) * (1.0 / best_d);
                if (sd < 0.0) dir = dir * -1.0;
            } else {
                dir = p - centroid(poly);
                const double n = norm(dir);
                dir = n > 1e-12 ? dir * (1.0 / n) : Vec2{1.0, 0.0};
            }
            p = best + dir * (r + eps);
            pushed = moved = true;
        }
        for (const auto& s : w.walls) {
            const Vec2 q = closest_point(p, s);
            const double d = distance(p, q);
            if (d >= r) continue;
            if (d <= 1e-12) continue;
            p = q + (p - q) * ((r + eps) / d);
            moved = true;
        }
        if (!moved) break;
    }
    return pushed;
}

}  // namespace

std::pair<RoverState, StepEvents> step(const World& world, const RoverState& rover,
                                       const ActionCommand& action, double t,
                                       EpisodeProgress& progress) {
    StepEvents ev;
    const double dt = world.config.dt;
    const double t1 = t + dt;
    RoverState next = rover;
    next.heading = wrap_angle(rover.heading + action.omega * kDeg * dt);

    const auto movers = world.movers_at(t1);
    Vec2 p = rover.position;
    if (!movers.empty() && resolve_push(world, movers, p, rover.radius)) ev.collision = true;

    if (action.v != 0.0) {
        const Vec2 motion{action.v * dt * std::cos(next.heading), action.v * dt * std::sin(next.heading)};
        const Vec2 target = p + motion;
        const double start_clear = clearance_impl(world, p, rover.radius, movers);
        const double end_clear = clearance_impl(world, target, rover.radius, movers);
        if (end_clear >= 0.0 || (start_clear < 0.0 && end_clear > start_clear)) {
            ev.distance_moved = norm(motion);
            p = target;
        } else {
            ev.collision = true;
            const double len = norm(motion);
            double lo = 0.0;
            double hi = 1.0;
            while ((hi - lo) * len > 1e-3) {
                const double mid = 0.5 * (lo + hi);
                if (clearance_impl(world, p + motion * mid, rover.radius, movers) >= 0.0) lo = mid;
                else hi = mid;
            }
            if (start_clear >= 0.0) {
                ev.distance_moved = lo * len;
                p = p + motion * lo;
            }
        }
    }
    next.position = p;

    const int targets = world.target_count();
    const bool all_targets = progress.targets_done == targets;
    for (std::size_t g = 0; g < world.goals.size(); ++g) {
        if (progress.goal_done[g]) continue;
        const Goal& goal = world.goals[g];
        if (goal.kind == GoalKind::home && !all_targets) continue;
        if (distance(p, goal.position) > goal.radius) continue;
        progress.goal_done[g] = 1;
        ++progress.goals_done;
        if (goal.kind != GoalKind::home) ++progress.targets_done;
        ev.goal_reached = goal.id;
        ev.goal_kind = goal.kind;
        break;
    }

    const auto cell = static_cast<std::size_t>(world.cell_index(p));
    if (!progress.cell_visited[cell]) {
        progress.cell_visited[cell] = 1;
        ++progress.cells_visited;
        ev.new_cell = true;
    }
    ev.hazard_exposure = world.hazard_level(p, t1);
    return {next, ev};
}

// ---------------------------------------------------------------------------
// Generation

namespace {

void add_boundary(World& w) {
    const Vec2 a{0, 0}, b{w.width, 0}, c{w.width, w.height}, d{0, w.height};
    w.walls.push_back({a, b});
    w.walls.push_back({b, c});
    w.walls.push_back({c, d});
    w.walls.push_back({d, a});
}

void add_obstacle(World& w, Polygon poly) {
    append_edges(poly, w.walls);
    w.obstacles.push_back(std::move(poly));
}

/// Horizontal wall from x0 to x1 at y, leaving the given [lo, hi] gaps open.
void wall_with_gaps(World& w, double x0, double x1, double y, std::vector<std::pair<double, double>> gaps,
                    bool vertical = false) {
    std::sort(gaps.begin(), gaps.end());
    double cur = x0;
    auto emit = [&](double u0, double u1) {
        if (u1 - u0 < 1e-6) return;
        if (vertical) w.walls.push_back({{y, u0}, {y, u1}});
        else w.walls.push_back({{u0, y}, {u1, y}});
    };
    for (auto [lo, hi] : gaps) {
        emit(cur, lo);
        cur = std::max(cur, hi);
    }
    emit(cur, x1);
}

/// Occupancy grid used to prove every goal is reachable by the rover disc.
class Reachability {
public:
    explicit Reachability(const World& w) {
        res_ = std::max(0.2, w.width / 600.0);
        nx_ = static_cast<int>(std::ceil(w.width / res_));
        ny_ = static_cast<int>(std::ceil(w.height / res_));
        blocked_.assign(static_cast<std::size_t>(nx_ * ny_), 0);
        const double r = kRoverRadius + 0.05;
        for (const auto& s : w.walls) {
            const auto [i0, j0] = cell_of({std::min(s.a.x, s.b.x) - r, std::min(s.a.y, s.b.y) - r});
            const auto [i1, j1] = cell_of({std::max(s.a.x, s.b.x) + r, std::max(s.a.y, s.b.y) + r});
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    if (point_segment_distance(center(i, j), s) < r) blocked_[idx(i, j)] = 1;
        }
        for (const auto& poly : w.obstacles) {
            double x0 = kInf, y0 = kInf, x1 = -kInf, y1 = -kInf;
            for (Vec2 v : poly) {
                x0 = std::min(x0, v.x);
                y0 = std::min(y0, v.y);
                x1 = std::max(x1, v.x);
                y1 = std::max(y1, v.y);
            }
            const auto [i0, j0] = cell_of({x0, y0});
            const auto [i1, j1] = cell_of({x1, y1});
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    if (contains(poly, center(i, j))) blocked_[idx(i, j)] = 1;
        }
    }

    /// Flood fill from `from`; true iff every point in `to` lands in reached free space.
    bool all_reachable(Vec2 from, std::span<const Vec2> to) const {
        const auto [si, sj] = cell_of(from);
        if (blocked_[idx(si, sj)]) return false;
        std::vector<char> seen(blocked_.size(), 0);
        std::vector<int> stack{static_cast<int>(idx(si, sj))};
        seen[idx(si, sj)] = 1;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            const int i = c % nx_;
            const int j = c / nx_;
            const int ni[4] = {i + 1, i - 1, i, i};
            const int nj[4] = {j, j, j + 1, j - 1};
            for (int k = 0; k < 4; ++k) {
                if (ni[k] < 0 || nj[k] < 0 || ni[k] >= nx_ || nj[k] >= ny_) continue;
                const auto n = idx(ni[k], nj[k]);
                if (seen[n] || blocked_[n]) continue;
                seen[n] = 1;
                stack.push_back(static_cast<int>(n));
            }
        }
        for (Vec2 p : to) {
            const auto [i, j] = cell_of(p);
            if (!seen[idx(i, j)]) return false;
        }
        return true;
    }

private:
    std::pair<int, int> cell_of(Vec2 p) const {
        return {std::clamp(static_cast<int>(std::floor(p.x / res_)), 0, nx_ - 1),
                std::clamp(static_cast<int>(std::floor(p.y / res_)), 0, ny_ - 1)};
    }
    Vec2 center(int i, int j) const { return {(i + 0.5) * res_, (j + 0.5) * res_}; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j * nx_ + i); }

    double res_ = 0.25;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<char> blocked_;
};

struct Room {
    double x0, y0, x1, y1;
    Vec2 door;  // centre of the hallway door
    Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

bool generate_indoor(World& w, Random& rng) {
    const ScenarioConfig& cfg = w.config;
    const double W = w.width;
    const double H = w.height;
    add_boundary(w);

    const double hw = std::clamp(0.14 * W, 2.5, 4.0);
    const double ylo = H / 2 - hw / 2;
    const double yhi = H / 2 + hw / 2;
    const int n_rooms = cfg.n_rooms - 1;
    const int top = (n_rooms + 1) / 2;
    const int bottom = n_rooms - top;

    std::vector<Room> rooms;
    auto build_row = [&](int count, bool upper) {
        if (count == 0) return;
        const double rw = W / count;
        const double y_wall = upper ? yhi : ylo;
        const double y_far = upper ? H : 0.0;
        std::vector<std::pair<double, double>> gaps;
        for (int i = 0; i < count; ++i) {
            const double x0 = i * rw;
            const double x1 = x0 + rw;
            const double door_w = std::min(rng.uniform(1.4, 1.8), 0.35 * rw);
            const double cx = x0 + rw * (0.3 + 0.4 * rng.uniform());
            gaps.emplace_back(cx - door_w / 2, cx + door_w / 2);
            rooms.push_back({x0, std::min(y_wall, y_far), x1, std::max(y_wall, y_far), {cx, y_wall}});
            if (i > 0) {
                // Divider between rooms i-1 and i, sometimes with a connecting door.
                std::vector<std::pair<double, double>> dgaps;
                const double ya = std::min(y_wall, y_far);
                const double yb = std::max(y_wall, y_far);
                if (rng.chance(0.5)) {
                    const double dy = ya + (yb - ya) * rng.uniform(0.35, 0.65);
                    dgaps.emplace_back(dy - 0.8, dy + 0.8);
                }
                wall_with_gaps(w, ya, yb, x0, dgaps, true);
            }
        }
        wall_with_gaps(w, 0.0, W, y_wall, gaps);
    };
    build_row(top, true);
    build_row(bottom, false);

    // Furniture keeps clear of doors and room centres.
    for (const Room& room : rooms) {
        const int n = static_cast<int>(rng.index(3));
        for (int k = 0; k < n; ++k) {
            for (int attempt = 0; attempt < 20; ++attempt) {
                const double hx = rng.uniform(0.3, 0.8);
                const double hy = rng.uniform(0.3, 0.8);
                const double m = 0.8;
                if (room.x1 - room.x0 < 2 * (hx + m) + 0.1 || room.y1 - room.y0 < 2 * (hy + m) + 0.1)
                    break;
                const Vec2 c{rng.uniform(room.x0 + hx + m, room.x1 - hx - m),
                             rng.uniform(room.y0 + hy + m, room.y1 - hy - m)};
                const double r = std::hypot(hx, hy);
                if (distance(c, room.door) < r + 2.0) continue;
                if (distance(c, room.center()) < r + 1.0) continue;
                add_obstacle(w, box(c, hx, hy));
                break;
            }
        }
    }

    // Debris narrowing the hallway, flush against one hallway wall.
    const double max_depth = hw / 2 - 1.15;
    if (max_depth >= 0.2 && rng.chance(0.5)) {
        const double depth = rng.uniform(0.2, max_depth);
        const double len = rng.uniform(0.8, 2.0);
        const bool upper = rng.chance(0.5);
        for (int attempt = 0; attempt < 20; ++attempt) {
            const double cx = rng.uniform(4.0, W - 4.0);
            bool near_door = false;
            for (const Room& room : rooms)
                if (std::abs(room.door.x - cx) < len / 2 + 1.5) near_door = true;
            if (near_door) continue;
            const double cy = upper ? yhi - depth / 2 : ylo + depth / 2;
            add_obstacle(w, box({cx, cy}, len / 2, depth / 2));
            break;
        }
    }

    w.spawn = {1.5, H / 2};
    w.spawn_heading = 0.0;

    // Target rooms: a random subset of size n_targets.
    std::vector<std::size_t> order(rooms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (int k = 0; k < cfg.n_targets; ++k) {
        const Room& room = rooms[order[static_cast<std::size_t>(k)]];
        const double radius =
            std::max(1.0, 0.5 * std::min(room.x1 - room.x0, room.y1 - room.y0) - 0.8);
        w.goals.push_back({k, room.center(), radius, GoalKind::room_zone});
    }
    w.goals.push_back({cfg.n_targets, w.spawn, 1.5, GoalKind::home});

    if (cfg.dynamic_obstacles) {
        MovingObstacle m;
        m.shape = box({0, 0}, 0.4, 0.4);
        const double xa = std::max(1.6, w.spawn.x + 3.0 + 0.4);
        const double xb = W - 1.6;
        if (xb > xa + 1.0) {
            m.path.waypoints = {{xa, H / 2}, {xb, H / 2}};
            m.path.speed = 0.4;
            m.path.phase = rng.uniform(0.0, m.path.length() / m.path.speed);
            w.movers.push_back(std::move(m));
        }
    }
    return true;
}

/// Random convex blob of roughly the given radius.
Polygon blob(Random& rng, Vec2 c, double radius) {
    std::vector<Vec2> pts;
    const int n = 5 + static_cast<int>(rng.index(4));
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * kPi);
        const double r = radius * rng.uniform(0.5, 1.0);
        pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    Polygon hull = convex_hull(std::move(pts));
    if (hull.size() < 3) hull = regular_polygon(c, radius, 6);
    return hull;
}

/// Sample points that keep pairwise and spawn separation; false if it cannot.
bool place_far_apart(Random& rng, const World& w, int n, double sep, double from_spawn, double margin,
                     std::vector<Vec2>& out) {
    for (int k = 0; k < n; ++k) {
        bool ok = false;
        for (int attempt = 0; attempt < 2000 && !ok; ++attempt) {
            const Vec2 p{rng.uniform(margin, w.width - margin), rng.uniform(margin, w.height - margin)};
            if (distance(p, w.spawn) < from_spawn) continue;
            ok = std::all_of(out.begin(), out.end(), [&](Vec2 q) { return distance(p, q) >= sep; });
            if (ok) out.push_back(p);
        }
        if (!ok) return false;
    }
    return true;
}

bool generate_outdoor(World& w, Random& rng) {
    const ScenarioConfig& cfg = w.config;
    const double W = w.width;
    add_boundary(w);
    w.spawn = {W / 2 + rng.uniform(-0.05, 0.05) * W, w.height / 2 + rng.uniform(-0.05, 0.05) * W};
    w.spawn_heading = rng.uniform(-kPi, kPi);

    std::vector<Vec2> survivors;
    if (!place_far_apart(rng, w, cfg.n_targets, 0.25 * W, 0.15 * W, 2.0, survivors)) return false;
    for (int k = 0; k < cfg.n_targets; ++k)
        w.goals.push_back({k, survivors[static_cast<std::size_t>(k)], 1.5, GoalKind::survivor});

    const int n_rubble = cfg.n_obstacles >= 0 ? cfg.n_obstacles
                                              : static_cast<int>(std::lround(W * W / 400.0));
    for (int k = 0; k < n_rubble; ++k) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            const double r = rng.uniform(1.0, 4.0);
            const Vec2 c{rng.uniform(r + 1.0, W - r - 1.0), rng.uniform(r + 1.0, w.height - r - 1.0)};
            if (distance(c, w.spawn) < r + 3.0) continue;
            if (std::any_of(survivors.begin(), survivors.end(),
                            [&](Vec2 s) { return distance(c, s) < r + 2.5; }))
                continue;
            add_obstacle(w, blob(rng, c, r));
            break;
        }
    }

    Hazard h;
    const double hr = std::clamp(0.05 * W, 2.0, 6.0);
    h.shape = regular_polygon({0, 0}, hr, 8, kPi / 8);
    h.intensity = rng.uniform(0.5, 1.0);
    {
        // Waypoints keep the hazard off the spawn point.
        std::vector<Vec2> pts;
        for (int k = 0; k < 3; ++k) {
            for (int attempt = 0; attempt < 200; ++attempt) {
                const Vec2 p{rng.uniform(hr + 1, W - hr - 1), rng.uniform(hr + 1, w.height - hr - 1)};
                if (distance(p, w.spawn) < hr + 3.0) continue;
                pts.push_back(p);
                break;
            }
        }
        if (pts.empty()) return false;
        h.path.waypoints = pts;
        h.path.speed = cfg.dynamic_obstacles ? 0.3 : 0.0;
        const double len = h.path.length();
        h.path.phase = len > 0 ? rng.uniform(0.0, len / 0.3) : 0.0;
    }
    if (h.path.speed <= 0.0) h.path.phase = 0.0;
    if (contains(h.at(0.0), w.spawn)) return false;
    w.hazards.push_back(std::move(h));
    return true;
}

double polygon_distance(const Polygon& a, Vec2 p) { return std::max(0.0, signed_distance(a, p)); }

bool generate_industrial(World& w, Random& rng) {
    const ScenarioConfig& cfg = w.config;
    const double W = w.width;
    add_boundary(w);
    w.spawn = {W / 2 + rng.uniform(-0.05, 0.05) * W, w.height / 2 + rng.uniform(-0.05, 0.05) * W};
    w.spawn_heading = rng.uniform(-kPi, kPi);

    std::vector<Vec2> checkpoints;
    if (!place_far_apart(rng, w, cfg.n_targets, 0.15 * W, 0.2 * W, 3.0, checkpoints)) return false;
    for (int k = 0; k < cfg.n_targets; ++k)
        w.goals.push_back({k, checkpoints[static_cast<std::size_t>(k)], 1.5, GoalKind::checkpoint});

    auto clear_of_goals = [&](Vec2 c, double r, double margin) {
        if (distance(c, w.spawn) < r + margin + 2.0) return false;
        return std::none_of(checkpoints.begin(), checkpoints.end(),
                            [&](Vec2 q) { return distance(c, q) < r + margin + 1.5; });
    };
    const int n_struct = cfg.n_obstacles >= 0 ? cfg.n_obstacles
                                              : static_cast<int>(std::lround(W * W / 1000.0));
    for (int k = 0; k < n_struct; ++k) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            const bool tank = rng.chance(0.5);
            const double hx = tank ? rng.uniform(2.0, 5.0) : rng.uniform(3.0, 8.0);
            const double hy = tank ? hx : rng.uniform(3.0, 8.0);
            const double r = std::hypot(hx, hy);
            const Vec2 c{rng.uniform(r + 2.0, W - r - 2.0), rng.uniform(r + 2.0, w.height - r - 2.0)};
            if (!clear_of_goals(c, tank ? hx : r, 1.0)) continue;
            const bool overlaps = std::any_of(w.obstacles.begin(), w.obstacles.end(), [&](const Polygon& o) {
                return distance(centroid(o), c) < bounding_radius(o, centroid(o)) + r + 2.0;
            });
            if (overlaps) continue;
            add_obstacle(w, tank ? regular_polygon(c, hx, 8, kPi / 8) : box(c, hx, hy));
            break;
        }
    }

    if (cfg.dynamic_obstacles) {
        // Timed zones: solid while active.
        const int n_zones = std::max(1, static_cast<int>(std::lround(W / 50.0)));
        for (int k = 0; k < n_zones; ++k) {
            for (int attempt = 0; attempt < 50; ++attempt) {
                const double hs = rng.uniform(1.5, 3.0);
                const Vec2 c{rng.uniform(hs + 2.0, W - hs - 2.0), rng.uniform(hs + 2.0, w.height - hs - 2.0)};
                if (!clear_of_goals(c, hs * std::numbers::sqrt2, 1.0)) continue;
                if (clearance_impl(w, c, hs * std::numbers::sqrt2 + 1.0, {}) < 0.0) continue;
                MovingObstacle z;
                z.shape = box({0, 0}, hs, hs);
                z.path.waypoints = {c};
                z.schedule.period = rng.uniform(20.0, 40.0);
                z.schedule.on_fraction = 0.5;
                z.schedule.phase = rng.uniform(0.0, z.schedule.period);
                w.movers.push_back(std::move(z));
                break;
            }
        }
        // Roaming obstacle on a loop that clears all static geometry.
        const double hs = 0.75;
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<Vec2> pts;
            for (int k = 0; k < 4; ++k)
                pts.push_back({rng.uniform(3.0, W - 3.0), rng.uniform(3.0, w.height - 3.0)});
            bool ok = true;
            for (std::size_t i = 0; i < pts.size() && ok; ++i) {
                const Vec2 a = pts[i];
                const Vec2 b = pts[(i + 1) % pts.size()];
                const int samples = static_cast<int>(distance(a, b) / 0.5) + 1;
                for (int s = 0; s <= samples && ok; ++s) {
                    const Vec2 p = a + (b - a) * (static_cast<double>(s) / samples);
                    if (clearance_impl(w, p, hs * std::numbers::sqrt2 + 0.8, {}) < 0.0) ok = false;
                }
            }
            if (!ok) continue;
            MovingObstacle m;
            m.shape = box({0, 0}, hs, hs);
            m.path.waypoints = pts;
            m.path.speed = 0.5;
            m.path.phase = rng.uniform(0.0, m.path.length() / m.path.speed);
            if (polygon_distance(m.at(0.0), w.spawn) < 3.0) continue;
            w.movers.push_back(std::move(m));
            break;
        }
    }
    w.goals.push_back({cfg.n_targets, w.spawn, 2.0, GoalKind::home});
    return true;
}

}  // namespace

World build_scenario(const ScenarioConfig& config) {
    config.validate();
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        World w;
        w.config = config;
        w.width = config.arena_size;
        w.height = config.arena_size;
        w.cells_x = static_cast<int>(std::ceil(w.width / kCoverageCell - 1e-9));
        w.cells_y = static_cast<int>(std::ceil(w.height / kCoverageCell - 1e-9));
        Random rng(attempt == 0 ? derive_seed({config.seed, 0x5ce9a110ULL})
                                : derive_seed({config.seed, 0x5ce9a110ULL, static_cast<std::uint64_t>(attempt)}));
        bool ok = false;
        switch (config.kind) {
            case ScenarioKind::indoor_fire: ok = generate_indoor(w, rng); break;
            case ScenarioKind::outdoor_rescue: ok = generate_outdoor(w, rng); break;
            case ScenarioKind::industrial_inspect: ok = generate_industrial(w, rng); break;
        }
        if (!ok) continue;
        if (clearance(w, w.spawn, kRoverRadius, 0.0) <= 0.0) continue;
        std::vector<Vec2> goal_points;
        for (const auto& g : w.goals) goal_points.push_back(g.position);
        if (!Reachability(w).all_reachable(w.spawn, goal_points)) continue;
        return w;
    }
    throw GenerationError("no feasible " + std::string(to_string(config.kind)) + " layout after " +
                          std::to_string(kMaxGenerationAttempts) + " attempts (seed " +
                          std::to_string(config.seed) + ")");
}

}  // namespace neatnav
