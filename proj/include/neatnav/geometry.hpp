#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace neatnav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Vec2>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    else if (a > std::numbers::pi) a -= two_pi;
    return a;
}

/// Distance along a ray (unit `dir`) to segment `s`, or +inf on a miss.
/// Parallel and collinear configurations count as misses.
inline double ray_segment(Vec2 origin, Vec2 dir, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const double denom = cross(dir, e);
    if (std::abs(denom) < 1e-14) return kInf;
    const Vec2 w = s.a - origin;
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
    return kInf;
}

inline Vec2 closest_point(Vec2 p, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const double len2 = dot(e, e);
    if (len2 <= 0.0) return s.a;
    const double u = std::clamp(dot(p - s.a, e) / len2, 0.0, 1.0);
    return s.a + e * u;
}

inline double point_segment_distance(Vec2 p, const Segment& s) {
    return distance(p, closest_point(p, s));
}

/// Inclusive containment for a CCW convex polygon.
inline bool contains(const Polygon& poly, Vec2 p) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        if (cross(b - a, p - a) < 0.0) return false;
    }
    return true;
}

inline void append_edges(const Polygon& poly, std::vector<Segment>& out) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back({poly[i], poly[(i + 1) % n]});
}

inline Polygon translated(const Polygon& poly, Vec2 offset) {
    Polygon out = poly;
    for (auto& v : out) v += offset;
    return out;
}

/// Axis-aligned box centred on `c`.
inline Polygon box(Vec2 c, double half_w, double half_h) {
    return {{c.x - half_w, c.y - half_h},
            {c.x + half_w, c.y - half_h},
            {c.x + half_w, c.y + half_h},
            {c.x - half_w, c.y + half_h}};
}

inline Polygon regular_polygon(Vec2 c, double radius, int sides, double rotation = 0.0) {
    Polygon out;
    out.reserve(static_cast<std::size_t>(sides));
    for (int i = 0; i < sides; ++i) {
        const double a = rotation + 2.0 * std::numbers::pi * i / sides;
        out.push_back({c.x + radius * std::cos(a), c.y + radius * std::sin(a)});
    }
    return out;
}

/// Andrew's monotone chain; returns CCW hull without repeated endpoint.
inline Polygon convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (pts.size() < 3) return pts;
    Polygon hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

/// Smallest radius around `c` enclosing every vertex.
inline double bounding_radius(const Polygon& poly, Vec2 c) {
    double r = 0.0;
    for (Vec2 v : poly) r = std::max(r, distance(v, c));
    return r;
}

inline Vec2 centroid(const Polygon& poly) {
    Vec2 s{};
    for (Vec2 v : poly) s += v;
    return poly.empty() ? s : s * (1.0 / static_cast<double>(poly.size()));
}

}  // namespace neatnav
