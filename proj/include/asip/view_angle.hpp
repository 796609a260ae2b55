#pragma once

#include <vector>

#include "asip/geometry.hpp"
#include "asip/global_planner.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Per-target-cell observation priority scores driving view-angle selection.
class ScoreField {
public:
    ScoreField() = default;
    ScoreField(const ReferenceMap& ref, double initial, double max_score, double min_score);

    double score(int cell) const { return scores_[static_cast<std::size_t>(cell)]; }
    double initial_score() const { return initial_; }
    double max_score() const { return max_; }
    double min_score() const { return min_; }

    void set_scanned(int cell) { scores_[static_cast<std::size_t>(cell)] = min_; }
    void boost_occluded(int cell) {
        auto& s = scores_[static_cast<std::size_t>(cell)];
        s = std::min(2.0 * s, max_);
    }
    /// Uniform rescale (used by the argmax-invariance property test).
    void scale(double factor) {
        for (double& s : scores_) s *= factor;
    }

private:
    std::vector<double> scores_;
    double initial_ = 1.0, max_ = 8.0, min_ = 0.0;
};

struct ViewAngleParams {
    double initial_score = 1.0;
    double max_score = 8.0;
    double min_score = 0.0;
    int candidate_count = 72;  // uniform discretization of [0, 2pi)
    double yaw_rate_limit = 1.5;
};

struct ViewAngleQuery {
    Vec2 robot_position;
    double nominal_yaw = 0.0;
    int candidate_count = 72;
    SensorModel sensor;
};

struct OcclusionReport {
    std::vector<int> blocked_viewpoints;  // indices into the plan's viewpoint array
    std::vector<int> occluded_cells;      // sorted, deduplicated target cells
    std::vector<int> scanned_cells;       // covered target cells
};

/// A viewpoint is blocked when its cell is occupied in the live map or the
/// sight line along its nominal yaw to its surface anchor is interrupted.
/// Only the viewpoints listed in `pending` are considered.
std::vector<int> identify_blocked_viewpoints(const InspectionPlan& plan,
                                             const std::vector<int>& pending,
                                             const OccupancyGrid& live);

/// Target cells inside the viewpoint's nominal field-of-view cone whose sight
/// line is interrupted by a live occupied cell that is absent from the
/// reference structure. Returned sorted by cell index.
std::vector<int> get_occluded_regions(const Viewpoint& v, const SensorModel& sensor,
                                      const ReferenceMap& ref, const OccupancyGrid& live);

/// Target cells inside the nominal cone with reference line of sight (the
/// footprint the plan expects the viewpoint to cover).
std::vector<int> nominal_footprint(const Viewpoint& v, const SensorModel& sensor,
                                   const ReferenceMap& ref);

/// Score update pass: scanned cells drop to the floor, occluded cells double
/// up to the cap; scanned wins when a cell appears in both sets.
void update_scores(ScoreField& field, const OcclusionReport& report);

/// Sum of scores over target cells visible from (p, phi) through the live map.
double raycast_score(double phi, const Vec2& robot_position, const SensorModel& sensor,
                     const ScoreField& field, const OccupancyGrid& live, const ReferenceMap& ref);

/// Preference weight for a candidate angle: (cos(phi - phi_nominal) + 1) / 2.
double view_weight(double phi, double phi_nominal);

/// Argmax of view_weight * raycast_score over the candidate set. Ties break
/// toward the nominal yaw, then the lowest candidate index.
double select_view_angle(const ViewAngleQuery& query, const ScoreField& field,
                         const OccupancyGrid& live, const ReferenceMap& ref);

}  // namespace asip
