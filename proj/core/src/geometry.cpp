#include "sketchplan/geometry.hpp"

#include <algorithm>

namespace sketchplan {

double normalize_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (!std::isfinite(theta))
        return theta;
    double t = std::fmod(theta + std::numbers::pi, two_pi);
    if (t < 0.0)
        t += two_pi;
    double out = t - std::numbers::pi;
    // fmod rounding can land exactly on +pi
    if (out >= std::numbers::pi)
        out -= two_pi;
    return out;
}

bool Rect::contains(Vec2 p, double margin) const {
    return p.x >= min_x() + margin && p.x <= max_x() - margin && p.y >= min_y() + margin &&
           p.y <= max_y() - margin;
}

double Rect::distance_to(Vec2 p) const {
    double dx = std::max({min_x() - p.x, 0.0, p.x - max_x()});
    double dy = std::max({min_y() - p.y, 0.0, p.y - max_y()});
    return std::hypot(dx, dy);
}

bool Rect::overlaps(const Rect &other) const {
    return min_x() < other.max_x() && other.min_x() < max_x() && min_y() < other.max_y() &&
           other.min_y() < max_y();
}

double distance_point_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 <= 0.0)
        return distance(p, a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

bool disc_intersects_rect(Vec2 center, double radius, const Rect &rect) {
    return rect.distance_to(center) < radius;
}

}  // namespace sketchplan

#include "sketchplan/rng.hpp"

#include <bit>

namespace sketchplan {

std::uint64_t hash_double(double v) {
    if (v == 0.0)
        v = 0.0;  // fold -0.0
    return mix64(std::bit_cast<std::uint64_t>(v));
}

}  // namespace sketchplan
