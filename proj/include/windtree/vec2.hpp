#pragma once
#include <cmath>

namespace windtree {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double k, Vec2 v) { return v * k; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 v) { return dot(v, v); }
inline double norm(Vec2 v) { return std::sqrt(norm2(v)); }

/// Rotate v counterclockwise by angle (radians).
inline Vec2 rotated(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Reflect direction v off a surface with outward unit normal n.
inline Vec2 reflected(Vec2 v, Vec2 n) { return v - 2.0 * dot(v, n) * n; }

} // namespace windtree
