#pragma once

#include <array>
#include <vector>

#include "asip/geometry.hpp"

namespace asip {

/// Uniform B-spline of order k over 2D control points. Endpoint interpolation
/// is realized by repeating the first and last control point k-1 times, so
/// evaluation at the domain ends returns the start and goal exactly and the
/// trajectory departs from / arrives at rest.
class BSplineTrajectory {
public:
    BSplineTrajectory() = default;
    BSplineTrajectory(int order, std::vector<Vec2> control_points, double knot_dt);

    /// Control net [start x(k-1), interior..., goal x(k-1)].
    static BSplineTrajectory pinned(int order, const Vec2& start,
                                    const std::vector<Vec2>& interior, const Vec2& goal,
                                    double knot_dt);

    int order() const { return order_; }
    double knot_dt() const { return knot_dt_; }
    const std::vector<Vec2>& control_points() const { return control_; }
    std::vector<Vec2>& control_points() { return control_; }

    /// Trajectory duration in seconds (number of valid spans times knot_dt).
    double duration() const;

    /// Position at normalized time t in [0, 1]. Throws std::out_of_range
    /// outside the domain.
    Vec2 eval(double t) const;
    /// Position and time derivatives up to order 3 (meters, m/s, m/s^2, m/s^3).
    std::array<Vec2, 4> eval_derivatives(double t) const;

private:
    Vec2 de_boor(const std::vector<Vec2>& points, int degree, double u, int knot_offset) const;

    int order_ = 4;
    std::vector<Vec2> control_;
    double knot_dt_ = 0.5;
};

}  // namespace asip
