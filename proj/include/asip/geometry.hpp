#pragma once

#include <algorithm>
#include <cmath>

namespace asip {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    Vec2 operator-() const { return {-x, -y}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    double angle() const { return std::atan2(y, x); }
    Vec2 rotated(double a) const {
        const double c = std::cos(a), s = std::sin(a);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a + kPi, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a - kPi;
}

/// Absolute wrapped angular distance, in [0, pi].
inline double angular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

/// Circular mean of a running unit-vector sum.
inline double circular_mean(double sum_cos, double sum_sin) { return std::atan2(sum_sin, sum_cos); }

struct Pose {
    Vec2 position;
    double yaw = 0.0;
};

/// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 <= 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace asip
