#include "asip/naive_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace asip {

namespace {

// Connected components of the target set (8-connectivity), each ordered along
// the surface by a greedy nearest-neighbor walk from the lowest-index cell.
std::vector<std::vector<int>> surface_runs(const ReferenceMap& ref) {
    const GridSpec& spec = ref.spec();
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(spec.size()), 0);
    std::vector<std::vector<int>> runs;
    constexpr int off[8][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    for (int c0 : ref.target_cells()) {
        if (seen[static_cast<std::size_t>(c0)]) continue;
        std::vector<int> component;
        std::deque<int> queue{c0};
        seen[static_cast<std::size_t>(c0)] = 1;
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            component.push_back(c);
            const int cx = spec.cell_x(c), cy = spec.cell_y(c);
            for (auto& o : off) {
                const int nx = cx + o[0], ny = cy + o[1];
                if (!spec.in_bounds(nx, ny)) continue;
                const int n = spec.index(nx, ny);
                if (!ref.is_target(n) || seen[static_cast<std::size_t>(n)]) continue;
                seen[static_cast<std::size_t>(n)] = 1;
                queue.push_back(n);
            }
        }
        // Greedy walk for a traversal order.
        std::sort(component.begin(), component.end());
        std::vector<int> ordered;
        std::vector<std::uint8_t> used(component.size(), 0);
        int cur = 0;
        used[0] = 1;
        ordered.push_back(component[0]);
        for (std::size_t step = 1; step < component.size(); ++step) {
            const Vec2 p = spec.center_of(component[static_cast<std::size_t>(cur)]);
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < component.size(); ++j) {
                if (used[j]) continue;
                const double d = (spec.center_of(component[j]) - p).norm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(j);
                }
            }
            used[static_cast<std::size_t>(best)] = 1;
            ordered.push_back(component[static_cast<std::size_t>(best)]);
            cur = best;
        }
        runs.push_back(std::move(ordered));
    }
    return runs;
}

}  // namespace

InspectionPlan plan_naive(const ReferenceMap& ref, const GlobalPlannerParams& params,
                          const SensorModel& sensor, const Vec2& start) {
    const GridSpec& spec = ref.spec();
    const double spacing = viewpoint_spacing(params, sensor);
    const OccupancyGrid& nominal = ref.as_grid();

    std::vector<Viewpoint> viewpoints;
    int run_id = 0;
    for (const auto& run : surface_runs(ref)) {
        double since_last = spacing;  // sample the first cell of each run
        for (int c : run) {
            since_last += spec.resolution;
            if (since_last < spacing) continue;
            since_last = 0.0;
            const Vec2 surface = spec.center_of(c);
            const Vec2 n = unit_vector(ref.normal(c));
            Viewpoint vp;
            vp.source_segment = run_id;
            vp.surface_point = surface;
            const Vec2 direct = surface + n * params.standoff;
            const int direct_cell = spec.cell_of(direct);
            bool placed = false;
            if (direct_cell >= 0 && ref.is_interior_free(direct_cell) &&
                line_of_sight(nominal, direct, surface)) {
                vp.position = direct;
                placed = true;
            } else {
                for (double t = params.standoff - 0.5 * spec.resolution;
                     t > 0.25 * spec.resolution; t -= 0.5 * spec.resolution) {
                    const int cell = spec.cell_of(surface + n * t);
                    if (cell < 0 || !ref.is_interior_free(cell)) continue;
                    const Vec2 candidate = spec.center_of(cell);
                    if (!line_of_sight(nominal, candidate, surface)) continue;
                    vp.position = candidate;
                    placed = true;
                    break;
                }
            }
            if (!placed) continue;
            vp.yaw = (surface - vp.position).angle();
            vp.surface_index = static_cast<int>(viewpoints.size());
            viewpoints.push_back(vp);
        }
        ++run_id;
    }

    InspectionPlan plan;
    if (viewpoints.empty()) return plan;

    // Position-only nearest-neighbor tour from the start.
    const int n = static_cast<int>(viewpoints.size());
    std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
    std::vector<int> order;
    Vec2 cursor = start;
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = (viewpoints[static_cast<std::size_t>(j)].position - cursor).norm();
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        order.push_back(best);
        cursor = viewpoints[static_cast<std::size_t>(best)].position;
    }

    plan.viewpoints = std::move(viewpoints);
    for (std::size_t i = 0; i < order.size(); ++i) {
        Cluster c;
        c.id = static_cast<int>(i);
        c.source_segment = plan.viewpoints[static_cast<std::size_t>(order[i])].source_segment;
        c.viewpoints = {order[i]};
        plan.entry_viewpoint.push_back(order[i]);
        plan.flat_order.push_back(order[i]);
        plan.clusters.push_back(std::move(c));
    }
    return plan;
}

}  // namespace asip
