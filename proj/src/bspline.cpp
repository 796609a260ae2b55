#include "asip/bspline.hpp"

#include <stdexcept>

#include "asip/errors.hpp"

namespace asip {

BSplineTrajectory::BSplineTrajectory(int order, std::vector<Vec2> control_points, double knot_dt)
    : order_(order), control_(std::move(control_points)), knot_dt_(knot_dt) {
    if (order_ < 2) throw std::invalid_argument("spline order must be >= 2");
    if (knot_dt_ <= 0.0) throw std::invalid_argument("knot spacing must be positive");
    const int min_points = 2 * (order_ - 1) + 1;
    if (static_cast<int>(control_.size()) < min_points)
        throw std::invalid_argument("too few control points");
}

BSplineTrajectory BSplineTrajectory::pinned(int order, const Vec2& start,
                                            const std::vector<Vec2>& interior, const Vec2& goal,
                                            double knot_dt) {
    std::vector<Vec2> pts;
    pts.reserve(2 * (order - 1) + interior.size() + (interior.empty() ? 1 : 0));
    for (int i = 0; i < order - 1; ++i) pts.push_back(start);
    if (interior.empty())
        pts.push_back((start + goal) * 0.5);
    else
        pts.insert(pts.end(), interior.begin(), interior.end());
    for (int i = 0; i < order - 1; ++i) pts.push_back(goal);
    return BSplineTrajectory(order, std::move(pts), knot_dt);
}

double BSplineTrajectory::duration() const {
    const int spans = static_cast<int>(control_.size()) - order_ + 1;
    return spans * knot_dt_;
}

// de Boor's algorithm over uniform knots u_i = (i + knot_offset) * knot_dt.
// `points` are the control points of a (possibly differentiated) spline of
// the given degree.
Vec2 BSplineTrajectory::de_boor(const std::vector<Vec2>& points, int degree, double u,
                                int knot_offset) const {
    const int n = static_cast<int>(points.size());
    auto knot = [&](int i) { return (i + knot_offset) * knot_dt_; };

    // Span index j with u in [u_j, u_{j+1}), clamped to the valid range.
    int j = static_cast<int>(u / knot_dt_) - knot_offset;
    j = std::max(degree, std::min(j, n - 1));

    std::array<Vec2, 8> d;  // degree <= 7, plenty for order-4 plus derivatives
    for (int i = 0; i <= degree; ++i) d[static_cast<std::size_t>(i)] = points[static_cast<std::size_t>(j - degree + i)];
    for (int r = 1; r <= degree; ++r) {
        for (int i = degree; i >= r; --i) {
            const int idx = j - degree + i;
            const double lo = knot(idx);
            const double hi = knot(idx + degree - r + 1);
            const double alpha = (u - lo) / (hi - lo);
            d[static_cast<std::size_t>(i)] =
                d[static_cast<std::size_t>(i - 1)] * (1.0 - alpha) + d[static_cast<std::size_t>(i)] * alpha;
        }
    }
    return d[static_cast<std::size_t>(degree)];
}

Vec2 BSplineTrajectory::eval(double t) const { return eval_derivatives(t)[0]; }

std::array<Vec2, 4> BSplineTrajectory::eval_derivatives(double t) const {
    if (t < -1e-12 || t > 1.0 + 1e-12) throw std::out_of_range("spline parameter outside [0, 1]");
    t = std::clamp(t, 0.0, 1.0);

    const int p = order_ - 1;
    const int n = static_cast<int>(control_.size());
    const double u_start = p * knot_dt_;
    const double u_end = n * knot_dt_;
    const double u = u_start + t * (u_end - u_start);

    std::array<Vec2, 4> out{};
    // Derivative control points: Q_i = (P_{i+1} - P_i) / knot_dt for uniform
    // knots; each differentiation drops the degree by one and shifts the knot
    // origin by one.
    std::vector<Vec2> pts = control_;
    int degree = p;
    int knot_offset = 0;
    for (int order_idx = 0; order_idx <= 3; ++order_idx) {
        if (degree < 0 || static_cast<int>(pts.size()) < degree + 1) {
            out[static_cast<std::size_t>(order_idx)] = Vec2{0.0, 0.0};
            continue;
        }
        if (degree == 0) {
            // Piecewise constant; locate the span directly.
            int j = static_cast<int>(u / knot_dt_) - knot_offset;
            j = std::max(0, std::min(j, static_cast<int>(pts.size()) - 1));
            out[static_cast<std::size_t>(order_idx)] = pts[static_cast<std::size_t>(j)];
        } else {
            out[static_cast<std::size_t>(order_idx)] = de_boor(pts, degree, u, knot_offset);
        }
        if (order_idx == 3) break;
        std::vector<Vec2> diff;
        diff.reserve(pts.size() - 1);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            diff.push_back((pts[i + 1] - pts[i]) / knot_dt_);
        pts = std::move(diff);
        --degree;
        ++knot_offset;
    }
    return out;
}

}  // namespace asip
