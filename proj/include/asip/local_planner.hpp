#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asip/bspline.hpp"
#include "asip/distance_field.hpp"
#include "asip/geometry.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Weights of the static trajectory cost: control effort (squared second
/// differences), smoothness (squared third differences) and collision (a
/// quadratic hinge on the clearance against a distance field).
struct CostWeights {
    double control = 1.0;
    double smooth = 1.0;
    double collision = 100.0;
    double clearance = 0.5;
};

struct StaticPlanOptions {
    int order = 4;
    double knot_dt = 0.5;
    double control_spacing = 0.5;  // meters between interior control points
    int max_iterations = 500;
    double relative_tolerance = 1e-6;
};

/// Cost and analytic gradient of the static objective for a control net.
/// The gradient covers only the free (interior) control points; pinned ends
/// contribute to the cost but are not optimization variables.
double static_cost(const std::vector<Vec2>& control, int order, const DistanceField& field,
                   const CostWeights& weights, std::vector<Vec2>* gradient);

/// Elastic-band trajectory through the waypoints: interior control points are
/// initialized by arc-length interpolation of the waypoint polyline, then
/// refined by gradient descent with backtracking line search. Throws
/// InfeasibleError("static plan infeasible") when the sampled trajectory ends
/// closer than clearance minus one cell to the field's obstacles, and
/// std::invalid_argument when a waypoint starts inside an occupied cell.
BSplineTrajectory static_plan(const std::vector<Vec2>& waypoints, const DistanceField& field,
                              const OccupancyGrid& occupancy, const CostWeights& weights,
                              const StaticPlanOptions& options = {});

/// Convenience overload planning against the reference map's structure.
BSplineTrajectory static_plan(const std::vector<Vec2>& waypoints, const ReferenceMap& ref,
                              const CostWeights& weights, const StaticPlanOptions& options = {});

/// Position-velocity state of the tracked robot.
struct RobotState {
    Vec2 position;
    Vec2 velocity;
    double yaw = 0.0;
    double time = 0.0;
};

/// Inflated disc obstacle region extracted from the live map.
struct ObstacleRegion {
    Vec2 center;
    double radius = 0.0;
};

struct MpcParams {
    int horizon = 20;
    double dt = 0.1;
    double control_weight = 0.1;   // lambda_u
    double u_min = -2.0;           // componentwise bounds, m/s^2
    double u_max = 2.0;
    double obstacle_weight = 50.0;
    int iterations = 60;
};

struct MpcProblem {
    MpcParams params;
    std::vector<RobotState> reference;      // horizon + 1 states
    std::vector<ObstacleRegion> obstacles;  // already inflated by robot radius
};

struct MpcSolution {
    Vec2 command;                       // u_0
    std::vector<RobotState> predicted;  // x_0..x_N rollout under the solution
    bool braking = false;
};

/// Receding-horizon tracker. Holds the warm-started control sequence of one
/// robot; not shared across concurrent missions.
class MpcTracker {
public:
    explicit MpcTracker(const MpcParams& params) : params_(params) {}

    /// Projected gradient descent on the control sequence with componentwise
    /// clipping. If the optimized rollout still penetrates an obstacle region,
    /// returns a braking command along -v instead. Throws
    /// std::runtime_error("state in collision") when x0 is already inside a
    /// region.
    MpcSolution step(const MpcProblem& problem, const RobotState& x0);

    void reset();

private:
    MpcParams params_;
    std::vector<Vec2> warm_;
};

/// Exact double-integrator step shared by the tracker and the simulator.
RobotState integrate_state(const RobotState& x, const Vec2& u, double dt);

/// Disc regions fitted to the connected live-occupied components near the
/// robot, excluding cells that belong to the reference structure (those are
/// handled by the static plan's clearance). Large components are split into
/// discs of bounded radius, each inflated by `inflation`.
std::vector<ObstacleRegion> extract_obstacle_regions(const OccupancyGrid& live,
                                                     const ReferenceMap& ref, const Vec2& robot,
                                                     double range, double inflation);

/// Arc-length parameterization of a trajectory, built once per leg.
class TrajectorySampler {
public:
    TrajectorySampler() = default;
    explicit TrajectorySampler(const BSplineTrajectory& traj, double sample_step = 0.01);

    double total_length() const { return total_; }
    Vec2 position_at(double arc) const;
    /// Arc length accumulated up to a normalized time in [0, 1].
    double arc_at_time(double t_norm) const;

    /// Monotone projection of the robot position onto the trajectory, looking
    /// ahead of the previous progress.
    double advance(double arc_prev, const Vec2& robot, double window = 0.8) const;

    /// Reference states spaced at most v_max*dt apart along the arc, clamped
    /// at the goal.
    std::vector<RobotState> reference(double arc_now, int horizon, double dt, double v_max) const;

private:
    std::vector<Vec2> points_;
    std::vector<double> arc_;
    double total_ = 0.0;
};

/// Reference extraction per the module contract: t_now is normalized time,
/// converted to arc length internally so consecutive reference positions are
/// at most v_max*dt apart.
std::vector<RobotState> extract_reference(const BSplineTrajectory& traj, double t_now,
                                          int horizon, double dt, double v_max);

/// Sampled (t, x, y, vx, vy) rows in delimited text.
std::string serialize_trajectory(const BSplineTrajectory& traj, double dt);

}  // namespace asip
