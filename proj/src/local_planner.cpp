#include "asip/local_planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "asip/errors.hpp"

namespace asip {

double static_cost(const std::vector<Vec2>& control, int order, const DistanceField& field,
                   const CostWeights& weights, std::vector<Vec2>* gradient) {
    const int n = static_cast<int>(control.size());
    const int pin = order - 1;
    if (gradient) gradient->assign(control.size(), Vec2{});

    double cost = 0.0;
    // Control effort: squared second differences.
    for (int i = 1; i + 1 < n; ++i) {
        const Vec2 d2 = control[static_cast<std::size_t>(i + 1)] - control[static_cast<std::size_t>(i)] * 2.0 +
                        control[static_cast<std::size_t>(i - 1)];
        cost += weights.control * d2.squared_norm();
        if (gradient) {
            const Vec2 g = d2 * (2.0 * weights.control);
            (*gradient)[static_cast<std::size_t>(i - 1)] += g;
            (*gradient)[static_cast<std::size_t>(i)] -= g * 2.0;
            (*gradient)[static_cast<std::size_t>(i + 1)] += g;
        }
    }
    // Smoothness: squared third differences.
    for (int i = 0; i + 3 < n; ++i) {
        const Vec2 d3 = control[static_cast<std::size_t>(i + 3)] - control[static_cast<std::size_t>(i + 2)] * 3.0 +
                        control[static_cast<std::size_t>(i + 1)] * 3.0 - control[static_cast<std::size_t>(i)];
        cost += weights.smooth * d3.squared_norm();
        if (gradient) {
            const Vec2 g = d3 * (2.0 * weights.smooth);
            (*gradient)[static_cast<std::size_t>(i)] -= g;
            (*gradient)[static_cast<std::size_t>(i + 1)] += g * 3.0;
            (*gradient)[static_cast<std::size_t>(i + 2)] -= g * 3.0;
            (*gradient)[static_cast<std::size_t>(i + 3)] += g;
        }
    }
    // Collision: quadratic hinge on the clearance over the distance field.
    for (int i = 0; i < n; ++i) {
        const double dist = field.sample(control[static_cast<std::size_t>(i)]);
        const double gap = weights.clearance - dist;
        if (gap > 0.0) {
            cost += weights.collision * gap * gap;
            if (gradient)
                (*gradient)[static_cast<std::size_t>(i)] -=
                    field.gradient(control[static_cast<std::size_t>(i)]) * (2.0 * weights.collision * gap);
        }
    }
    // Pinned control points are not decision variables.
    if (gradient) {
        for (int i = 0; i < pin && i < n; ++i) (*gradient)[static_cast<std::size_t>(i)] = Vec2{};
        for (int i = std::max(0, n - pin); i < n; ++i) (*gradient)[static_cast<std::size_t>(i)] = Vec2{};
    }
    return cost;
}

namespace {

double grad_norm2(const std::vector<Vec2>& g) {
    double s = 0.0;
    for (const Vec2& v : g) s += v.squared_norm();
    return s;
}

}  // namespace

BSplineTrajectory static_plan(const std::vector<Vec2>& waypoints, const DistanceField& field,
                              const OccupancyGrid& occupancy, const CostWeights& weights,
                              const StaticPlanOptions& options) {
    if (waypoints.size() < 2) throw std::invalid_argument("static plan needs at least 2 waypoints");
    for (const Vec2& w : {waypoints.front(), waypoints.back()}) {
        const int cell = occupancy.spec().cell_of(w);
        if (cell < 0 || occupancy.occupied(cell))
            throw std::invalid_argument("static plan endpoint in collision");
    }

    // Arc-length interpolation of the waypoint polyline seeds the interior
    // control points.
    std::vector<double> cum(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        cum[i] = cum[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
    const double total = cum.back();
    auto along = [&](double s) {
        std::size_t i = 1;
        while (i < cum.size() && cum[i] < s) ++i;
        if (i >= cum.size()) i = cum.size() - 1;
        const double seg = cum[i] - cum[i - 1];
        const double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
        return waypoints[i - 1] + (waypoints[i] - waypoints[i - 1]) * t;
    };

    const int interior = std::max(1, static_cast<int>(std::ceil(total / options.control_spacing)) - 1);
    std::vector<Vec2> interior_pts;
    interior_pts.reserve(static_cast<std::size_t>(interior));
    for (int i = 1; i <= interior; ++i)
        interior_pts.push_back(along(total * i / (interior + 1)));
    BSplineTrajectory traj = BSplineTrajectory::pinned(options.order, waypoints.front(),
                                                       interior_pts, waypoints.back(),
                                                       options.knot_dt);

    // Gradient descent with backtracking line search on the control net.
    std::vector<Vec2>& control = traj.control_points();
    std::vector<Vec2> gradient, candidate;
    double cost = static_cost(control, options.order, field, weights, &gradient);
    double step = 0.1;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const double g2 = grad_norm2(gradient);
        if (g2 < 1e-18) break;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            candidate = control;
            for (std::size_t i = 0; i < control.size(); ++i) candidate[i] -= gradient[i] * step;
            const double cand_cost = static_cost(candidate, options.order, field, weights, nullptr);
            if (cand_cost <= cost - 1e-4 * step * g2) {
                const double improvement = cost - cand_cost;
                control = candidate;
                cost = cand_cost;
                static_cost(control, options.order, field, weights, &gradient);
                step = std::min(step * 1.6, 10.0);
                accepted = true;
                if (improvement < options.relative_tolerance * std::max(cost, 1e-12)) iter = options.max_iterations;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    // The sampled trajectory must keep clearance minus one cell from the
    // field's obstacles.
    const double margin = weights.clearance - field.spec().resolution;
    const int samples = std::max(2, static_cast<int>(traj.duration() / (0.1 * options.knot_dt)));
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        if (field.sample(traj.eval(t)) < margin - 1e-9)
            throw InfeasibleError("static plan infeasible");
    }
    return traj;
}

BSplineTrajectory static_plan(const std::vector<Vec2>& waypoints, const ReferenceMap& ref,
                              const CostWeights& weights, const StaticPlanOptions& options) {
    return static_plan(waypoints, DistanceField::from_reference(ref), ref.as_grid(), weights,
                       options);
}

RobotState integrate_state(const RobotState& x, const Vec2& u, double dt) {
    RobotState next = x;
    next.position = x.position + x.velocity * dt + u * (0.5 * dt * dt);
    next.velocity = x.velocity + u * dt;
    next.time = x.time + dt;
    return next;
}

namespace {

struct Rollout {
    std::vector<Vec2> p;
    std::vector<Vec2> v;
};

void roll(const RobotState& x0, const std::vector<Vec2>& u, double dt, Rollout& out) {
    const std::size_t n = u.size();
    out.p.resize(n + 1);
    out.v.resize(n + 1);
    out.p[0] = x0.position;
    out.v[0] = x0.velocity;
    for (std::size_t k = 0; k < n; ++k) {
        out.p[k + 1] = out.p[k] + out.v[k] * dt + u[k] * (0.5 * dt * dt);
        out.v[k + 1] = out.v[k] + u[k] * dt;
    }
}

double mpc_cost(const Rollout& r, const std::vector<Vec2>& u, const MpcProblem& prob) {
    const auto& par = prob.params;
    double cost = 0.0;
    for (std::size_t k = 1; k < r.p.size(); ++k) {
        const auto& ref = prob.reference[std::min(k, prob.reference.size() - 1)];
        cost += (r.p[k] - ref.position).squared_norm() + (r.v[k] - ref.velocity).squared_norm();
        for (const auto& ob : prob.obstacles) {
            const double gap = ob.radius - (r.p[k] - ob.center).norm();
            if (gap > 0.0) cost += par.obstacle_weight * gap * gap;
        }
    }
    for (const Vec2& uk : u) cost += par.control_weight * uk.squared_norm();
    return cost;
}

void mpc_gradient(const Rollout& r, const std::vector<Vec2>& u, const MpcProblem& prob,
                  std::vector<Vec2>& grad) {
    const auto& par = prob.params;
    const std::size_t n = u.size();
    grad.assign(n, Vec2{});
    Vec2 adj_p, adj_v;
    for (std::size_t k = n; k-- > 0;) {
        // Stage cost at x_{k+1}.
        const std::size_t s = k + 1;
        const auto& ref = prob.reference[std::min(s, prob.reference.size() - 1)];
        adj_p += (r.p[s] - ref.position) * 2.0;
        adj_v += (r.v[s] - ref.velocity) * 2.0;
        for (const auto& ob : prob.obstacles) {
            const Vec2 d = r.p[s] - ob.center;
            const double dist = d.norm();
            const double gap = ob.radius - dist;
            if (gap > 0.0 && dist > 1e-9)
                adj_p -= d * (2.0 * par.obstacle_weight * gap / dist);
        }
        grad[k] = adj_p * (0.5 * par.dt * par.dt) + adj_v * par.dt + u[k] * (2.0 * par.control_weight);
        // Chain back through the dynamics to step k.
        adj_v += adj_p * par.dt;
    }
}

bool penetrates(const std::vector<Vec2>& positions, const std::vector<ObstacleRegion>& obstacles) {
    for (const Vec2& p : positions)
        for (const auto& ob : obstacles)
            if ((p - ob.center).norm() < ob.radius) return true;
    return false;
}

}  // namespace

void MpcTracker::reset() { warm_.clear(); }

MpcSolution MpcTracker::step(const MpcProblem& problem, const RobotState& x0) {
    const auto& par = problem.params;
    for (const auto& ob : problem.obstacles)
        if ((x0.position - ob.center).norm() < ob.radius)
            throw std::runtime_error("state in collision");

    const std::size_t n = static_cast<std::size_t>(par.horizon);
    // Warm start: previous solution shifted by one step.
    std::vector<Vec2> u(n, Vec2{});
    if (warm_.size() == n)
        for (std::size_t k = 0; k + 1 < n; ++k) u[k] = warm_[k + 1];

    auto clip = [&](Vec2& uk) {
        uk.x = std::clamp(uk.x, par.u_min, par.u_max);
        uk.y = std::clamp(uk.y, par.u_min, par.u_max);
    };
    for (Vec2& uk : u) clip(uk);

    Rollout rollout;
    roll(x0, u, par.dt, rollout);
    double cost = mpc_cost(rollout, u, problem);
    std::vector<Vec2> grad, cand(n);
    Rollout cand_roll;
    double step_size = 0.05;
    for (int iter = 0; iter < par.iterations; ++iter) {
        mpc_gradient(rollout, u, problem, grad);
        double g2 = 0.0;
        for (const Vec2& g : grad) g2 += g.squared_norm();
        if (g2 < 1e-16) break;
        bool accepted = false;
        for (int bt = 0; bt < 25; ++bt) {
            for (std::size_t k = 0; k < n; ++k) {
                cand[k] = u[k] - grad[k] * step_size;
                clip(cand[k]);
            }
            roll(x0, cand, par.dt, cand_roll);
            const double cand_cost = mpc_cost(cand_roll, cand, problem);
            if (cand_cost < cost - 1e-12) {
                u = cand;
                rollout = cand_roll;
                cost = cand_cost;
                step_size = std::min(step_size * 1.5, 1.0);
                accepted = true;
                break;
            }
            step_size *= 0.5;
        }
        if (!accepted) break;
    }

    MpcSolution sol;
    if (penetrates(rollout.p, problem.obstacles)) {
        // Safety fallback: maximal deceleration along -v until rest.
        sol.braking = true;
        const double speed = x0.velocity.norm();
        std::vector<Vec2> brake(n, Vec2{});
        RobotState x = x0;
        for (std::size_t k = 0; k < n; ++k) {
            const double sp = x.velocity.norm();
            Vec2 uk{};
            if (sp > 1e-9) {
                const double mag = std::min(par.u_max, sp / par.dt);
                uk = x.velocity * (-mag / sp);
                clip(uk);
            }
            brake[k] = uk;
            x = integrate_state(x, uk, par.dt);
        }
        roll(x0, brake, par.dt, rollout);
        u = brake;
        sol.command = speed > 1e-9 ? brake[0] : Vec2{};
    } else {
        sol.command = u.empty() ? Vec2{} : u[0];
    }

    sol.predicted.resize(rollout.p.size());
    for (std::size_t k = 0; k < rollout.p.size(); ++k) {
        sol.predicted[k].position = rollout.p[k];
        sol.predicted[k].velocity = rollout.v[k];
        sol.predicted[k].time = x0.time + static_cast<double>(k) * par.dt;
        sol.predicted[k].yaw = x0.yaw;
    }
    warm_ = u;
    return sol;
}

std::vector<ObstacleRegion> extract_obstacle_regions(const OccupancyGrid& live,
                                                     const ReferenceMap& ref, const Vec2& robot,
                                                     double range, double inflation) {
    const GridSpec& spec = live.spec();
    const int robot_cell = spec.cell_of(robot);
    if (robot_cell < 0) return {};
    const int r_cells = static_cast<int>(std::ceil(range / spec.resolution));
    const int rx = spec.cell_x(robot_cell), ry = spec.cell_y(robot_cell);

    // Collect unknown-obstacle cells (live occupied, not reference structure)
    // near the robot, then greedily cover them with bounded-radius discs.
    std::vector<int> cells;
    for (int iy = std::max(0, ry - r_cells); iy <= std::min(spec.height - 1, ry + r_cells); ++iy) {
        for (int ix = std::max(0, rx - r_cells); ix <= std::min(spec.width - 1, rx + r_cells); ++ix) {
            const int c = spec.index(ix, iy);
            if (!live.occupied(c) || ref.is_structure(c)) continue;
            if ((spec.center_of(c) - robot).norm() > range) continue;
            cells.push_back(c);
        }
    }

    std::vector<ObstacleRegion> regions;
    std::vector<std::uint8_t> covered(cells.size(), 0);
    const double cover_radius = 0.3;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (covered[i]) continue;
        const Vec2 center = spec.center_of(cells[i]);
        double max_d = 0.0;
        for (std::size_t j = i; j < cells.size(); ++j) {
            if (covered[j]) continue;
            const double d = (spec.center_of(cells[j]) - center).norm();
            if (d <= cover_radius) {
                covered[j] = 1;
                max_d = std::max(max_d, d);
            }
        }
        ObstacleRegion region;
        region.center = center;
        region.radius = max_d + 0.5 * spec.resolution * std::sqrt(2.0) + inflation;
        regions.push_back(region);
    }
    return regions;
}

TrajectorySampler::TrajectorySampler(const BSplineTrajectory& traj, double sample_step) {
    const double duration = traj.duration();
    const int samples = std::max(2, static_cast<int>(duration / sample_step));
    points_.reserve(static_cast<std::size_t>(samples + 1));
    arc_.reserve(static_cast<std::size_t>(samples + 1));
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        points_.push_back(traj.eval(t));
        arc_.push_back(i == 0 ? 0.0 : arc_.back() + (points_.back() - points_[points_.size() - 2]).norm());
    }
    total_ = arc_.back();
}

Vec2 TrajectorySampler::position_at(double arc) const {
    if (points_.empty()) return {};
    if (arc <= 0.0) return points_.front();
    if (arc >= total_) return points_.back();
    const auto it = std::upper_bound(arc_.begin(), arc_.end(), arc);
    const std::size_t i = static_cast<std::size_t>(it - arc_.begin());
    const double seg = arc_[i] - arc_[i - 1];
    const double t = seg > 0.0 ? (arc - arc_[i - 1]) / seg : 0.0;
    return points_[i - 1] + (points_[i] - points_[i - 1]) * t;
}

double TrajectorySampler::advance(double arc_prev, const Vec2& robot, double window) const {
    double best_arc = arc_prev;
    double best_d = (position_at(arc_prev) - robot).norm();
    const double step = 0.02;
    for (double s = arc_prev; s <= std::min(total_, arc_prev + window) + 1e-9; s += step) {
        const double d = (position_at(s) - robot).norm();
        if (d < best_d - 1e-12) {
            best_d = d;
            best_arc = s;
        }
    }
    return best_arc;
}

std::vector<RobotState> TrajectorySampler::reference(double arc_now, int horizon, double dt,
                                                     double v_max) const {
    std::vector<RobotState> out(static_cast<std::size_t>(horizon + 1));
    for (int k = 0; k <= horizon; ++k) {
        const double s = std::min(arc_now + v_max * dt * k, total_);
        out[static_cast<std::size_t>(k)].position = position_at(s);
        out[static_cast<std::size_t>(k)].time = dt * k;
    }
    for (int k = 0; k < horizon; ++k) {
        out[static_cast<std::size_t>(k)].velocity =
            (out[static_cast<std::size_t>(k + 1)].position - out[static_cast<std::size_t>(k)].position) / dt;
    }
    return out;
}

double TrajectorySampler::arc_at_time(double t_norm) const {
    if (points_.size() < 2) return 0.0;
    const double pos = std::clamp(t_norm, 0.0, 1.0) * static_cast<double>(points_.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), points_.size() - 2);
    const double f = pos - static_cast<double>(i);
    return arc_[i] * (1.0 - f) + arc_[i + 1] * f;
}

std::vector<RobotState> extract_reference(const BSplineTrajectory& traj, double t_now,
                                          int horizon, double dt, double v_max) {
    const TrajectorySampler sampler(traj);
    return sampler.reference(sampler.arc_at_time(t_now), horizon, dt, v_max);
}

std::string serialize_trajectory(const BSplineTrajectory& traj, double dt) {
    std::ostringstream os;
    os.precision(17);
    os << "t x y vx vy\n";
    const double duration = traj.duration();
    for (double t = 0.0; t <= duration + 1e-9; t += dt) {
        const double tn = std::min(t / duration, 1.0);
        const auto d = traj.eval_derivatives(tn);
        os << t << ' ' << d[0].x << ' ' << d[0].y << ' ' << d[1].x << ' ' << d[1].y << '\n';
    }
    return os.str();
}

}  // namespace asip
