#pragma once

#include <cmath>
#include <numbers>

namespace sketchplan {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;

    double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Wraps an angle into [-pi, pi).
double normalize_angle(double theta);

/// Planar pose. `theta` is kept in [-pi, pi).
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2() = default;
    Pose2(double x_, double y_, double theta_ = 0.0)
        : x(x_), y(y_), theta(normalize_angle(theta_)) {}

    Vec2 position() const { return {x, y}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta); }
    friend bool operator==(const Pose2 &, const Pose2 &) = default;
};

/// Axis-aligned rectangle given by center and half extents.
struct Rect {
    Vec2 center;
    Vec2 half;

    double min_x() const { return center.x - half.x; }
    double max_x() const { return center.x + half.x; }
    double min_y() const { return center.y - half.y; }
    double max_y() const { return center.y + half.y; }

    /// True if `p` lies inside the rectangle shrunk by `margin` on every side.
    bool contains(Vec2 p, double margin = 0.0) const;
    /// Euclidean distance from `p` to the rectangle (0 inside).
    double distance_to(Vec2 p) const;
    bool overlaps(const Rect &other) const;
    friend bool operator==(const Rect &, const Rect &) = default;
};

double distance_point_segment(Vec2 p, Vec2 a, Vec2 b);

/// Open-interior intersection: touching discs/rects do not intersect.
bool disc_intersects_rect(Vec2 center, double radius, const Rect &rect);

/// Bearing of `to` seen from `from`.
inline double bearing(Vec2 from, Vec2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

inline double angle_diff(double a, double b) { return normalize_angle(a - b); }

}  // namespace sketchplan
