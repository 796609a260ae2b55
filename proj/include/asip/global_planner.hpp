#pragma once

#include <string>
#include <vector>

#include "asip/geometry.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Maximal run of surface cells with coherent normals, produced by region
/// growing. Members are ordered along the surface.
struct Segment {
    int id = -1;
    std::vector<int> cells;            // ordered along the surface walk
    std::vector<double> cell_normals;  // parallel to cells
    double principal_orientation = 0.0;
    double mean_normal = 0.0;
    double arc_length = 0.0;
};

/// A planned pose from which a surface patch is observed.
struct Viewpoint {
    Vec2 position;
    double yaw = 0.0;          // nominal view angle, facing the surface
    int source_segment = -1;
    int surface_index = -1;    // order of the sample along its segment
    Vec2 surface_point;        // aimed-at point on the segment surface
    bool reachable = true;
};

/// Contiguous run of same-segment viewpoints in the global tour.
struct Cluster {
    int id = -1;
    int source_segment = -1;
    std::vector<int> viewpoints;  // indices into the plan's viewpoint array
};

struct InspectionPlan {
    std::vector<Viewpoint> viewpoints;
    std::vector<Cluster> clusters;       // global visit order
    std::vector<int> flat_order;         // flattened viewpoint visit sequence
    std::vector<int> entry_viewpoint;    // per cluster, first viewpoint index

    bool empty() const { return viewpoints.empty(); }
};

struct GlobalPlannerParams {
    double region_angle_threshold = 10.0 * kPi / 180.0;
    double standoff = 1.5;            // viewpoint offset along the normal, meters
    double spacing = 0.0;             // 0 = derive from sensor fov and overlap
    double fov_overlap = 0.3;
    double yaw_weight = 0.5;          // meters-per-radian term in the tour metric
    int tau_init = 1;
    int tau_max = 3;
    long tsp_move_budget_factor = 50; // examined moves capped at factor * n^2
};

/// Spacing between viewpoint samples along a segment for the given sensor.
double viewpoint_spacing(const GlobalPlannerParams& params, const SensorModel& sensor);

/// Region growing over the target cells: seeds at the lowest-curvature
/// unassigned cell and grows across 8-adjacent cells whose normal stays within
/// the angle threshold of the region's running mean.
std::vector<Segment> map_segmentation(const ReferenceMap& ref, const GlobalPlannerParams& params);

/// Viewpoints at standoff distance along the interior normal, sampled every
/// `spacing` meters of surface arc-length. Samples landing outside reference
/// free space are pulled inward along the normal to the nearest free cell
/// center that still sees the surface point, or dropped.
std::vector<Viewpoint> generate_viewpoints(const Segment& segment,
                                           const GlobalPlannerParams& params,
                                           const SensorModel& sensor, const ReferenceMap& ref);

/// Open tour over all viewpoints: nearest-neighbor construction from the
/// viewpoint closest to `start`, improved by 2-opt and Or-opt moves. The cost
/// metric is Euclidean distance plus yaw_weight * wrapped yaw difference.
std::vector<int> solve_tsp(const std::vector<Viewpoint>& viewpoints, const Vec2& start,
                           const GlobalPlannerParams& params);

double tour_cost(const std::vector<Viewpoint>& viewpoints, const std::vector<int>& order,
                 double yaw_weight);

/// Run-length decomposition of the tour into maximal same-segment clusters.
std::vector<Cluster> remap(const std::vector<int>& order, const std::vector<Viewpoint>& viewpoints);

/// One outlier-merge pass at threshold tau, applied until stable: clusters
/// smaller than tau fuse with the nearest same-segment sibling whenever the
/// fused run stays contiguous along the segment's surface order.
std::vector<Cluster> merge_outliers(const std::vector<Cluster>& clusters,
                                    const std::vector<Viewpoint>& viewpoints, int tau);

/// Intra-cluster reordering that preserves the global cluster order. Exact
/// (Held-Karp) for clusters of up to 10 viewpoints, 2-opt beyond.
InspectionPlan local_reorder(const std::vector<Cluster>& clusters,
                             const std::vector<Viewpoint>& viewpoints);

/// Optimal visiting order of `points` given an optional fixed entry point and
/// optional exit point. Exposed for the mission driver and tests.
std::vector<int> reorder_chain(const std::vector<Vec2>& points, const Vec2* entry,
                               const Vec2* exit);

/// Full pipeline: segmentation, viewpoint generation, TSP, remap, outlier
/// merging for tau in [tau_init, tau_max], local reorder.
InspectionPlan plan_global(const ReferenceMap& ref, const GlobalPlannerParams& params,
                           const SensorModel& sensor, const Vec2& start);

/// Plan text format: `plan <n_clusters>` then per cluster a header
/// `cluster <id> <segment_id> <n_viewpoints>` followed by one
/// `<x> <y> <yaw> <segment_id>` line per viewpoint in visit order.
std::string serialize_plan(const InspectionPlan& plan);
/// Rebuilds surface anchors by raycasting each viewpoint's yaw into the
/// reference structure.
InspectionPlan parse_plan(const std::string& text, const ReferenceMap& ref, double standoff);

}  // namespace asip
