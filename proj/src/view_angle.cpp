#include "asip/view_angle.hpp"

#include <algorithm>
#include <cmath>

namespace asip {

ScoreField::ScoreField(const ReferenceMap& ref, double initial, double max_score,
                       double min_score)
    : scores_(static_cast<std::size_t>(ref.spec().size()), 0.0),
      initial_(initial),
      max_(max_score),
      min_(min_score) {
    for (int c : ref.target_cells()) scores_[static_cast<std::size_t>(c)] = initial;
}

std::vector<int> identify_blocked_viewpoints(const InspectionPlan& plan,
                                             const std::vector<int>& pending,
                                             const OccupancyGrid& live) {
    std::vector<int> blocked;
    for (int idx : pending) {
        const Viewpoint& v = plan.viewpoints[static_cast<std::size_t>(idx)];
        const int cell = live.spec().cell_of(v.position);
        if (cell < 0) continue;
        if (live.occupied(cell) || !line_of_sight(live, v.position, v.surface_point))
            blocked.push_back(idx);
    }
    return blocked;
}

namespace {

// First occupied cell on the segment p -> target center, excluding the target
// cell itself; -1 when the sight line is clear.
int first_blocker(const OccupancyGrid& grid, const Vec2& from, int target_cell) {
    const GridSpec& spec = grid.spec();
    const Vec2 to = spec.center_of(target_cell);
    const int ca = spec.cell_of(from);
    if (ca < 0) return -1;
    if (ca == target_cell) return -1;
    if (grid.occupied(ca)) return ca;

    const Vec2 d = to - from;
    const double len = d.norm();
    const Vec2 dir = d / len;
    int ix = spec.cell_x(ca), iy = spec.cell_y(ca);
    const int bx = spec.cell_x(target_cell), by = spec.cell_y(target_cell);
    const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
    const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double edge = spec.origin.x + (ix + (step_x > 0 ? 1 : 0)) * spec.resolution;
        t_max_x = (edge - from.x) / dir.x;
        t_delta_x = spec.resolution / std::abs(dir.x);
    }
    if (step_y != 0) {
        const double edge = spec.origin.y + (iy + (step_y > 0 ? 1 : 0)) * spec.resolution;
        t_max_y = (edge - from.y) / dir.y;
        t_delta_y = spec.resolution / std::abs(dir.y);
    }
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
        if (t_entry >= len || !spec.in_bounds(ix, iy)) return -1;
        if (ix == bx && iy == by) return -1;
        const int c = spec.index(ix, iy);
        if (grid.occupied(c)) return c;
    }
}

}  // namespace

std::vector<int> nominal_footprint(const Viewpoint& v, const SensorModel& sensor,
                                   const ReferenceMap& ref) {
    return visible_cells(ref.as_grid(), ref, Pose{v.position, v.yaw}, sensor);
}

std::vector<int> get_occluded_regions(const Viewpoint& v, const SensorModel& sensor,
                                      const ReferenceMap& ref, const OccupancyGrid& live) {
    std::vector<int> occluded;
    const GridSpec& spec = ref.spec();
    const double range2 = sensor.max_range * sensor.max_range;
    const double half_fov = 0.5 * sensor.fov;
    for (int c : ref.target_cells()) {
        const Vec2 d = spec.center_of(c) - v.position;
        if (d.squared_norm() > range2) continue;
        if (angular_distance(d.angle(), v.yaw) > half_fov) continue;
        const int blocker = first_blocker(live, v.position, c);
        if (blocker >= 0 && !ref.is_structure(blocker)) occluded.push_back(c);
    }
    return occluded;
}

void update_scores(ScoreField& field, const OcclusionReport& report) {
    for (int c : report.occluded_cells) field.boost_occluded(c);
    // Scanned takes precedence over occluded.
    for (int c : report.scanned_cells) field.set_scanned(c);
}

double raycast_score(double phi, const Vec2& robot_position, const SensorModel& sensor,
                     const ScoreField& field, const OccupancyGrid& live,
                     const ReferenceMap& ref) {
    double total = 0.0;
    for (int c : visible_cells(live, ref, Pose{robot_position, phi}, sensor))
        total += field.score(c);
    return total;
}

double view_weight(double phi, double phi_nominal) {
    return 0.5 * (std::cos(phi - phi_nominal) + 1.0);
}

double select_view_angle(const ViewAngleQuery& query, const ScoreField& field,
                         const OccupancyGrid& live, const ReferenceMap& ref) {
    const int n = query.candidate_count;
    const GridSpec& spec = ref.spec();

    // Per-cell visibility is independent of the candidate angle, so compute
    // range, bearing and sight line once per target cell and reuse them for
    // every candidate. This preserves the definition exactly: a cell counts
    // for candidate phi iff its bearing lies within fov/2 of phi.
    struct VisibleEntry {
        double bearing;
        double score;
    };
    std::vector<VisibleEntry> entries;
    const double range2 = query.sensor.max_range * query.sensor.max_range;
    for (int c : ref.target_cells()) {
        const double s = field.score(c);
        if (s == 0.0) continue;
        const Vec2 d = spec.center_of(c) - query.robot_position;
        if (d.squared_norm() > range2) continue;
        if (!line_of_sight(live, query.robot_position, spec.center_of(c))) continue;
        entries.push_back({d.angle(), s});
    }

    const double half_fov = 0.5 * query.sensor.fov;
    double best_value = -1.0;
    double best_phi = query.nominal_yaw;
    double best_dev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const double phi = kTwoPi * k / n;
        double score = 0.0;
        for (const auto& e : entries)
            if (angular_distance(e.bearing, phi) <= half_fov) score += e.score;
        const double value = view_weight(phi, query.nominal_yaw) * score;
        const double dev = angular_distance(phi, query.nominal_yaw);
        if (value > best_value + 1e-12 ||
            (value > best_value - 1e-12 && dev < best_dev - 1e-12)) {
            best_value = value;
            best_phi = phi;
            best_dev = dev;
        }
    }
    return best_phi;
}

}  // namespace asip
