#pragma once

#include <array>
#include <string>
#include <vector>

#include "asip/global_planner.hpp"
#include "asip/grid_map.hpp"
#include "asip/local_planner.hpp"
#include "asip/view_angle.hpp"

namespace asip {

struct LidarModel {
    int ray_count = 360;
    double max_range = 8.0;
};

struct SimConfig {
    double dt = 0.1;
    SensorModel camera{1.5, 4.0, 64};
    LidarModel lidar;
    double max_mission_time = 2000.0;
    bool adaptation = true;

    double visit_tolerance = 0.3;
    double goal_tolerance = 0.15;
    double v_max = 1.0;
    double robot_radius = 0.2;
    double obstacle_region_range = 3.0;
    double nav_inflation = 0.35;
    int detour_attempts = 3;
    double occlusion_scan_range = 6.0;  // viewpoints considered by Alg-2 updates

    ViewAngleParams view;
    MpcParams mpc;
    CostWeights spline_weights;
    StaticPlanOptions spline_options;

    bool trace_view_angle = false;
};

enum class ViewpointStatus : int { Pending = 0, Visited = 1, SkippedUnreachable = 2, Missed = 3 };

const char* viewpoint_status_name(ViewpointStatus s);

struct MissionResult {
    std::vector<int> covered;  // sorted covered target cells
    std::vector<std::array<double, 4>> trajectory;  // t, x, y, yaw per tick
    std::vector<ViewpointStatus> viewpoint_status;
    std::vector<std::string> cluster_status;  // completed / partial / skipped
    std::vector<int> cluster_visit_order;     // cluster ids in first-visit order
    double sim_time = 0.0;
    long ticks = 0;
    bool completed = false;
    double executed_length = 0.0;
    std::string view_trace;  // optional (t, phi_nominal, phi_star, score) rows

    // Wall-clock diagnostics; kept out of the serialized result so reruns are
    // byte-identical.
    double planning_wall_seconds = 0.0;
};

/// One 360-degree mapping sweep plus one camera coverage evaluation from the
/// given pose against the truth scene. Throws InvariantError when the robot
/// is inside a truth-occupied cell.
void sense(const OccupancyGrid& truth, const ReferenceMap& ref, const Pose& robot,
           const SimConfig& config, OccupancyGrid& live, std::vector<std::uint8_t>& covered_flags,
           std::vector<int>& covered_cells);

/// Closed-loop execution of the plan: per cluster a routed transit leg to the
/// entry viewpoint and an inspection leg through the cluster's viewpoints,
/// tracked by MPC with per-tick sensing, score updates and (optionally)
/// adaptive view-angle selection. Deterministic for fixed inputs.
MissionResult run_mission(const ReferenceMap& ref, const OccupancyGrid& truth, const Pose& start,
                          const InspectionPlan& plan, const SimConfig& config);

std::string mission_result_json(const MissionResult& result, const ReferenceMap& ref);
std::string trajectory_csv(const MissionResult& result);
std::string covered_cell_list(const MissionResult& result);

}  // namespace asip
