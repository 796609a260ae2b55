#include "asip/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asip/distance_field.hpp"
#include "asip/errors.hpp"
#include "asip/route.hpp"

namespace asip {

using json = nlohmann::ordered_json;

const char* viewpoint_status_name(ViewpointStatus s) {
    switch (s) {
        case ViewpointStatus::Pending: return "pending";
        case ViewpointStatus::Visited: return "visited";
        case ViewpointStatus::SkippedUnreachable: return "skipped_unreachable";
        case ViewpointStatus::Missed: return "missed";
    }
    return "pending";
}

namespace {

// Walks a lidar ray against the truth grid, marking traversed cells free and
// the hit cell occupied in the live map.
void sweep_ray(const OccupancyGrid& truth, OccupancyGrid& live, const Vec2& origin, double angle,
               double max_range) {
    const GridSpec& spec = truth.spec();
    const int start = spec.cell_of(origin);
    if (start < 0) return;
    const Vec2 dir = unit_vector(angle);
    int ix = spec.cell_x(start), iy = spec.cell_y(start);
    const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
    const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double edge = spec.origin.x + (ix + (step_x > 0 ? 1 : 0)) * spec.resolution;
        t_max_x = (edge - origin.x) / dir.x;
        t_delta_x = spec.resolution / std::abs(dir.x);
    }
    if (step_y != 0) {
        const double edge = spec.origin.y + (iy + (step_y > 0 ? 1 : 0)) * spec.resolution;
        t_max_y = (edge - origin.y) / dir.y;
        t_delta_y = spec.resolution / std::abs(dir.y);
    }
    live.mark_free(start);
    while (true) {
        double t_entry;
        if (t_max_x < t_max_y) {
            t_entry = t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
        } else {
            t_entry = t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
        }
        if (t_entry > max_range || !spec.in_bounds(ix, iy)) return;
        const int c = spec.index(ix, iy);
        if (truth.occupied(c)) {
            live.mark_occupied(c);
            return;
        }
        live.mark_free(c);
    }
}

}  // namespace

void sense(const OccupancyGrid& truth, const ReferenceMap& ref, const Pose& robot,
           const SimConfig& config, OccupancyGrid& live, std::vector<std::uint8_t>& covered_flags,
           std::vector<int>& covered_cells) {
    const int robot_cell = truth.spec().cell_of(robot.position);
    if (robot_cell < 0 || truth.occupied(robot_cell))
        throw InvariantError("robot inside truth obstacle");

    // Mapping channel: 360-degree range sweep.
    for (int k = 0; k < config.lidar.ray_count; ++k) {
        const double angle = kTwoPi * k / config.lidar.ray_count;
        sweep_ray(truth, live, robot.position, angle, config.lidar.max_range);
    }

    // Inspection channel: camera field of view against the truth scene.
    for (int c : visible_cells(truth, ref, robot, config.camera)) {
        auto& flag = covered_flags[static_cast<std::size_t>(c)];
        if (!flag) {
            flag = 1;
            covered_cells.push_back(c);
        }
    }
}

namespace {

struct LegPlan {
    BSplineTrajectory traj;
    TrajectorySampler sampler;
};

// Combined structure + sensed-unknown-obstacle mask for leg planning.
std::vector<std::uint8_t> planning_mask(const ReferenceMap& ref, const OccupancyGrid& live) {
    const GridSpec& spec = ref.spec();
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(spec.size()), 0);
    for (int c = 0; c < spec.size(); ++c)
        if (ref.is_structure(c) || live.occupied(c)) mask[static_cast<std::size_t>(c)] = 1;
    return mask;
}

class MissionDriver {
public:
    MissionDriver(const ReferenceMap& ref, const OccupancyGrid& truth, const Pose& start,
                  const InspectionPlan& plan, const SimConfig& config)
        : ref_(ref),
          truth_(truth),
          plan_(plan),
          config_(config),
          live_(ref.spec(), Occ::Unknown),
          field_(ref, config.view.initial_score, config.view.max_score, config.view.min_score),
          tracker_(config.mpc),
          covered_flags_(static_cast<std::size_t>(ref.spec().size()), 0) {
        robot_.position = start.position;
        robot_.yaw = start.yaw;
        result_.viewpoint_status.assign(plan.viewpoints.size(), ViewpointStatus::Pending);
        reachable_.assign(plan.viewpoints.size(), true);
    }

    MissionResult run() {
        log_state();
        sense_now();
        for (std::size_t k = 0; k < plan_.clusters.size() && !timed_out(); ++k) {
            run_cluster(k);
        }
        finalize();
        return std::move(result_);
    }

private:
    bool timed_out() const { return time_ >= config_.max_mission_time; }

    void log_state() {
        result_.trajectory.push_back({time_, robot_.position.x, robot_.position.y, robot_.yaw});
    }

    void sense_now() {
        sense(truth_, ref_, Pose{robot_.position, robot_.yaw}, config_, live_, covered_flags_,
              result_.covered);
    }

    // Alg-2 bookkeeping: blocked viewpoints, occlusion inference, score update.
    void update_scores_and_blocked() {
        std::vector<int> nearby;
        for (std::size_t i = 0; i < plan_.viewpoints.size(); ++i) {
            if (result_.viewpoint_status[i] != ViewpointStatus::Pending) continue;
            if ((plan_.viewpoints[i].position - robot_.position).norm() <=
                config_.occlusion_scan_range)
                nearby.push_back(static_cast<int>(i));
        }
        OcclusionReport report;
        report.blocked_viewpoints = identify_blocked_viewpoints(plan_, nearby, live_);
        for (int idx : report.blocked_viewpoints) reachable_[static_cast<std::size_t>(idx)] = false;

        std::vector<int> occluded;
        for (int idx : nearby) {
            const auto occ = get_occluded_regions(plan_.viewpoints[static_cast<std::size_t>(idx)],
                                                  config_.camera, ref_, live_);
            occluded.insert(occluded.end(), occ.begin(), occ.end());
        }
        std::sort(occluded.begin(), occluded.end());
        occluded.erase(std::unique(occluded.begin(), occluded.end()), occluded.end());
        report.occluded_cells = std::move(occluded);
        report.scanned_cells = result_.covered;
        update_scores(field_, report);
    }

    void step_yaw(double target_yaw) {
        const double delta = wrap_angle(target_yaw - robot_.yaw);
        const double max_step = config_.view.yaw_rate_limit * config_.dt;
        robot_.yaw = wrap_angle(robot_.yaw + std::clamp(delta, -max_step, max_step));
    }

    // Next pending viewpoint of the chain, falling back to the last entry.
    int active_of_chain(const std::vector<int>& chain) const {
        for (int v : chain)
            if (result_.viewpoint_status[static_cast<std::size_t>(v)] == ViewpointStatus::Pending)
                return v;
        return chain.back();
    }

    // One control tick toward the active leg target. Returns false on mission
    // timeout.
    bool tick(const LegPlan& leg, double& progress, int active_viewpoint) {
        sense_now();
        update_scores_and_blocked();

        const Viewpoint& active = plan_.viewpoints[static_cast<std::size_t>(active_viewpoint)];
        double yaw_target = active.yaw;
        if (config_.adaptation) {
            ViewAngleQuery query;
            query.robot_position = robot_.position;
            query.nominal_yaw = active.yaw;
            query.candidate_count = config_.view.candidate_count;
            query.sensor = config_.camera;
            yaw_target = select_view_angle(query, field_, live_, ref_);
            if (config_.trace_view_angle) {
                std::ostringstream os;
                os.precision(10);
                os << time_ << ',' << active.yaw << ',' << yaw_target << '\n';
                result_.view_trace += os.str();
            }
        }
        step_yaw(yaw_target);

        progress = leg.sampler.advance(progress, robot_.position);
        MpcProblem problem;
        problem.params = config_.mpc;
        problem.reference =
            leg.sampler.reference(progress, config_.mpc.horizon, config_.mpc.dt, config_.v_max);
        problem.obstacles = extract_obstacle_regions(live_, ref_, robot_.position,
                                                     config_.obstacle_region_range,
                                                     config_.robot_radius);
        MpcSolution sol;
        try {
            sol = tracker_.step(problem, robot_);
        } catch (const std::runtime_error&) {
            // A freshly sensed obstacle region can swallow the robot's cell;
            // decelerate along -v until the region extraction clears.
            sol.braking = true;
            const double speed = robot_.velocity.norm();
            sol.command = speed > 1e-9
                              ? robot_.velocity * (-std::min(config_.mpc.u_max, speed / config_.dt) / speed)
                              : Vec2{};
        }
        braking_streak_ = sol.braking ? braking_streak_ + 1 : 0;

        const Vec2 before = robot_.position;
        RobotState next = integrate_state(robot_, sol.command, config_.dt);
        next.yaw = robot_.yaw;
        robot_ = next;
        result_.executed_length += (robot_.position - before).norm();
        time_ += config_.dt;
        ++result_.ticks;

        const int robot_cell = truth_.spec().cell_of(robot_.position);
        if (robot_cell < 0 || truth_.occupied(robot_cell))
            throw InvariantError("robot inside truth obstacle");
        log_state();
        check_visits();
        return !timed_out();
    }

    void check_visits() {
        if (active_cluster_ < 0) return;
        const Cluster& cluster = plan_.clusters[static_cast<std::size_t>(active_cluster_)];
        for (int v : cluster.viewpoints) {
            auto& status = result_.viewpoint_status[static_cast<std::size_t>(v)];
            if (status != ViewpointStatus::Pending) continue;
            if ((plan_.viewpoints[static_cast<std::size_t>(v)].position - robot_.position).norm() <=
                config_.visit_tolerance) {
                status = ViewpointStatus::Visited;
                if (result_.cluster_visit_order.empty() ||
                    result_.cluster_visit_order.back() != cluster.id)
                    result_.cluster_visit_order.push_back(cluster.id);
            }
        }
    }

    // Plans a leg to `goal` through routed waypoints, with clearance adjusted
    // for snug endpoints and the detour budget applied on failures.
    bool plan_leg(const std::vector<Vec2>& via, const Vec2& goal, LegPlan& out) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto mask = planning_mask(ref_, live_);
        const DistanceField field(ref_.spec(), mask);
        OccupancyGrid occupancy(ref_.spec(), Occ::Free);
        for (int c = 0; c < ref_.spec().size(); ++c)
            if (mask[static_cast<std::size_t>(c)]) occupancy.mark_occupied(c);

        CostWeights weights = config_.spline_weights;
        const double endpoint_floor =
            std::min(field.sample(robot_.position), field.sample(goal)) - ref_.spec().resolution;
        weights.clearance = std::max(0.05, std::min(weights.clearance, endpoint_floor));

        const double base_clearance = weights.clearance;
        bool planned = false;
        for (int attempt = 0; attempt < config_.detour_attempts && !planned; ++attempt) {
            // First the computed clearance, then inflated (wider detour), then
            // relaxed to squeeze through tight gaps.
            weights.clearance = attempt == 0 ? base_clearance
                              : attempt == 1 ? base_clearance * 1.25
                                             : base_clearance * 0.6;
            NavGrid nav(ref_.spec(), mask, std::min(config_.nav_inflation, weights.clearance));
            std::vector<Vec2> waypoints =
                route_waypoints(nav, robot_.position, goal, 2.0 * config_.nav_inflation);
            if (waypoints.size() < 2) {
                if (!via.empty()) continue;
                waypoints = {robot_.position, goal};
            }
            if (!via.empty()) {
                // Inspection legs keep the cluster's viewpoint chain.
                waypoints = via;
            }
            try {
                out.traj = static_plan(waypoints, field, occupancy, weights, config_.spline_options);
                out.sampler = TrajectorySampler(out.traj);
                planned = true;
            } catch (const std::exception&) {
                continue;
            }
        }
        result_.planning_wall_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return planned;
    }

    // Tracks a leg until the goal is reached (or a leg-local timeout expires);
    // returns false when the mission clock ran out.
    bool track_leg(const LegPlan& leg, const Vec2& goal, const std::vector<int>& chain) {
        double progress = 0.0;
        braking_streak_ = 0;
        const double leg_budget =
            4.0 * (leg.sampler.total_length() + 1.0) / config_.v_max + 15.0;
        const double leg_deadline = time_ + leg_budget;
        while (time_ < leg_deadline) {
            if (!tick(leg, progress, active_of_chain(chain))) return false;
            const bool at_goal = (robot_.position - goal).norm() <= config_.goal_tolerance &&
                                 robot_.velocity.norm() <= 0.25;
            const bool arc_done = progress >= leg.sampler.total_length() - 0.02;
            if (at_goal && arc_done) return true;
            if (braking_streak_ >= 8) return true;  // caller replans around the blockage
        }
        return true;  // leg timeout; caller decides how to proceed
    }

    int first_pending(const Cluster& cluster) const {
        for (int v : cluster.viewpoints)
            if (result_.viewpoint_status[static_cast<std::size_t>(v)] == ViewpointStatus::Pending)
                return v;
        return -1;
    }

    // Marks a viewpoint visited when the robot already stands within the visit
    // tolerance (track_leg's per-tick check covers the moving case).
    void settle_visit(int v) {
        auto& status = result_.viewpoint_status[static_cast<std::size_t>(v)];
        if (status == ViewpointStatus::Pending &&
            (plan_.viewpoints[static_cast<std::size_t>(v)].position - robot_.position).norm() <=
                config_.visit_tolerance) {
            status = ViewpointStatus::Visited;
            const int cid = plan_.clusters[static_cast<std::size_t>(active_cluster_)].id;
            if (result_.cluster_visit_order.empty() || result_.cluster_visit_order.back() != cid)
                result_.cluster_visit_order.push_back(cid);
        }
    }

    void run_cluster(std::size_t k) {
        active_cluster_ = static_cast<int>(k);
        const Cluster& cluster = plan_.clusters[k];
        std::map<int, int> attempts;  // per-viewpoint detour budget

        while (!timed_out()) {
            const int target = first_pending(cluster);
            if (target < 0) break;
            auto& status = result_.viewpoint_status[static_cast<std::size_t>(target)];
            const Viewpoint& vp = plan_.viewpoints[static_cast<std::size_t>(target)];

            // Unreachable outright: its cell is occupied in the live map.
            const int cell = live_.spec().cell_of(vp.position);
            if (cell >= 0 && live_.occupied(cell)) {
                status = ViewpointStatus::SkippedUnreachable;
                reachable_[static_cast<std::size_t>(target)] = false;
                continue;
            }
            if (attempts[target] >= config_.detour_attempts) {
                status = ViewpointStatus::SkippedUnreachable;
                reachable_[static_cast<std::size_t>(target)] = false;
                continue;
            }
            ++attempts[target];

            // Transit leg: routed approach to the cluster's next viewpoint.
            if ((robot_.position - vp.position).norm() > config_.visit_tolerance) {
                LegPlan transit;
                if (!plan_leg({}, vp.position, transit)) continue;
                if (!track_leg(transit, vp.position, {target})) return;  // mission timeout
            }
            settle_visit(target);
            if (status != ViewpointStatus::Visited) continue;  // replan or skip next round

            // Inspection leg: one static plan through the remaining pending
            // viewpoints of the cluster, in visit order.
            std::vector<int> chain;
            std::vector<Vec2> via{robot_.position};
            for (int v : cluster.viewpoints) {
                if (result_.viewpoint_status[static_cast<std::size_t>(v)] != ViewpointStatus::Pending)
                    continue;
                const int vcell = live_.spec().cell_of(
                    plan_.viewpoints[static_cast<std::size_t>(v)].position);
                if (vcell >= 0 && live_.occupied(vcell)) break;  // chain stops at blockage
                chain.push_back(v);
                via.push_back(plan_.viewpoints[static_cast<std::size_t>(v)].position);
            }
            if (chain.empty()) continue;
            LegPlan inspection;
            if (!plan_leg(via, via.back(), inspection)) continue;  // fall back to single legs
            if (!track_leg(inspection, via.back(), chain)) return;
            for (int v : chain) settle_visit(v);
        }

        int visited = 0;
        for (int v : cluster.viewpoints)
            if (result_.viewpoint_status[static_cast<std::size_t>(v)] == ViewpointStatus::Visited)
                ++visited;
        result_.cluster_status.push_back(
            visited == static_cast<int>(cluster.viewpoints.size()) ? "completed"
            : visited > 0                                          ? "partial"
                                                                   : "skipped");
    }

    void finalize() {
        std::sort(result_.covered.begin(), result_.covered.end());
        result_.sim_time = time_;
        bool all_done = true;
        for (auto s : result_.viewpoint_status)
            if (s == ViewpointStatus::Pending) all_done = false;
        result_.completed = all_done && !timed_out();
    }

    const ReferenceMap& ref_;
    const OccupancyGrid& truth_;
    const InspectionPlan& plan_;
    const SimConfig& config_;

    OccupancyGrid live_;
    ScoreField field_;
    MpcTracker tracker_;
    RobotState robot_;
    std::vector<std::uint8_t> covered_flags_;
    std::vector<bool> reachable_;
    MissionResult result_;
    double time_ = 0.0;
    int braking_streak_ = 0;
    int active_cluster_ = -1;
};

}  // namespace

MissionResult run_mission(const ReferenceMap& ref, const OccupancyGrid& truth, const Pose& start,
                          const InspectionPlan& plan, const SimConfig& config) {
    MissionDriver driver(ref, truth, start, plan, config);
    return driver.run();
}

std::string mission_result_json(const MissionResult& result, const ReferenceMap& ref) {
    json j;
    j["covered_count"] = result.covered.size();
    j["target_count"] = ref.target_cells().size();
    j["coverage_percent"] =
        ref.target_cells().empty()
            ? 0.0
            : 100.0 * static_cast<double>(result.covered.size()) /
                  static_cast<double>(ref.target_cells().size());
    j["sim_time"] = result.sim_time;
    j["ticks"] = result.ticks;
    j["completed"] = result.completed;
    j["executed_length"] = result.executed_length;
    j["viewpoint_status"] = json::array();
    for (auto s : result.viewpoint_status) j["viewpoint_status"].push_back(viewpoint_status_name(s));
    j["cluster_status"] = result.cluster_status;
    j["cluster_visit_order"] = result.cluster_visit_order;
    return j.dump(2) + "\n";
}

std::string trajectory_csv(const MissionResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << "t,x,y,yaw\n";
    for (const auto& row : result.trajectory)
        os << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << '\n';
    return os.str();
}

std::string covered_cell_list(const MissionResult& result) {
    std::ostringstream os;
    for (int c : result.covered) os << c << '\n';
    return os.str();
}

}  // namespace asip
