#pragma once

#include <cmath>

namespace dpns {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Counterclockwise perpendicular, the 2D tangent convention tau = (-n2, n1).
inline Vec2 perp(Vec2 n) { return {-n.y, n.x}; }

} // namespace dpns
