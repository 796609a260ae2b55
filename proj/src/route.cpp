#include "asip/route.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace asip {

NavGrid::NavGrid(const GridSpec& spec, const std::vector<std::uint8_t>& occupied_mask,
                 double inflation)
    : spec_(spec), blocked_(static_cast<std::size_t>(spec.size()), 0) {
    const DistanceField field(spec, occupied_mask);
    inflated_ = OccupancyGrid(spec, Occ::Free);
    for (int c = 0; c < spec.size(); ++c) {
        if (field.at_cell(c) < inflation) {
            blocked_[static_cast<std::size_t>(c)] = 1;
            inflated_.mark_occupied(c);
        }
    }
}

NavGrid NavGrid::from_grid(const OccupancyGrid& grid, double inflation) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.spec().size()), 0);
    for (int c = 0; c < grid.spec().size(); ++c)
        if (grid.occupied(c)) mask[static_cast<std::size_t>(c)] = 1;
    return NavGrid(grid.spec(), mask, inflation);
}

std::vector<Vec2> route_waypoints(const NavGrid& nav, const Vec2& start, const Vec2& goal,
                                  double endpoint_unblock_radius) {
    const GridSpec& spec = nav.spec();
    const int start_cell = spec.cell_of(start);
    const int goal_cell = spec.cell_of(goal);
    if (start_cell < 0 || goal_cell < 0) return {};

    // Working copy of the blocked mask with endpoint neighborhoods released.
    std::vector<std::uint8_t> blocked(static_cast<std::size_t>(spec.size()), 0);
    for (int c = 0; c < spec.size(); ++c) blocked[static_cast<std::size_t>(c)] = nav.blocked(c) ? 1 : 0;
    const int radius_cells =
        static_cast<int>(std::ceil(endpoint_unblock_radius / spec.resolution));
    for (int endpoint : {start_cell, goal_cell}) {
        const int ex = spec.cell_x(endpoint), ey = spec.cell_y(endpoint);
        const Vec2 p = endpoint == start_cell ? start : goal;
        for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
            for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
                const int nx = ex + dx, ny = ey + dy;
                if (!spec.in_bounds(nx, ny)) continue;
                const int n = spec.index(nx, ny);
                if ((spec.center_of(n) - p).norm() <= endpoint_unblock_radius)
                    blocked[static_cast<std::size_t>(n)] = 0;
            }
        }
    }
    if (blocked[static_cast<std::size_t>(start_cell)] || blocked[static_cast<std::size_t>(goal_cell)])
        return {};

    // A* with octile heuristic; ties resolved by heuristic then cell index so
    // the expansion order is deterministic.
    struct Node {
        double f, h;
        int cell;
        bool operator>(const Node& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return cell > o.cell;
        }
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(static_cast<std::size_t>(spec.size()), inf);
    std::vector<int> parent(static_cast<std::size_t>(spec.size()), -1);
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    const int gx = spec.cell_x(goal_cell), gy = spec.cell_y(goal_cell);
    auto heuristic = [&](int c) {
        const double dx = std::abs(spec.cell_x(c) - gx), dy = std::abs(spec.cell_y(c) - gy);
        return std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy);
    };
    g[static_cast<std::size_t>(start_cell)] = 0.0;
    open.push({heuristic(start_cell), heuristic(start_cell), start_cell});

    constexpr int off[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    bool found = false;
    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        const int c = node.cell;
        if (c == goal_cell) {
            found = true;
            break;
        }
        if (node.f > g[static_cast<std::size_t>(c)] + heuristic(c) + 1e-9) continue;  // stale
        const int cx = spec.cell_x(c), cy = spec.cell_y(c);
        for (int k = 0; k < 8; ++k) {
            const int nx = cx + off[k][0], ny = cy + off[k][1];
            if (!spec.in_bounds(nx, ny)) continue;
            const int n = spec.index(nx, ny);
            if (blocked[static_cast<std::size_t>(n)]) continue;
            if (k >= 4) {  // no corner cutting on diagonals
                const int o1 = spec.index(cx + off[k][0], cy);
                const int o2 = spec.index(cx, cy + off[k][1]);
                if (blocked[static_cast<std::size_t>(o1)] || blocked[static_cast<std::size_t>(o2)]) continue;
            }
            const double step = k < 4 ? 1.0 : std::sqrt(2.0);
            const double cand = g[static_cast<std::size_t>(c)] + step;
            if (cand < g[static_cast<std::size_t>(n)] - 1e-12) {
                g[static_cast<std::size_t>(n)] = cand;
                parent[static_cast<std::size_t>(n)] = c;
                open.push({cand + heuristic(n), heuristic(n), n});
            }
        }
    }
    if (!found) return {};

    std::vector<int> cells;
    for (int c = goal_cell; c >= 0; c = parent[static_cast<std::size_t>(c)]) cells.push_back(c);
    std::reverse(cells.begin(), cells.end());

    // String-pull to corner waypoints using sight lines over the released mask.
    OccupancyGrid view(spec, Occ::Free);
    for (int c = 0; c < spec.size(); ++c)
        if (blocked[static_cast<std::size_t>(c)]) view.mark_occupied(c);

    std::vector<Vec2> waypoints{start};
    std::size_t anchor = 0;
    auto point_of = [&](std::size_t i) {
        if (i == 0) return start;
        if (i + 1 == cells.size()) return goal;
        return spec.center_of(cells[i]);
    };
    while (anchor + 1 < cells.size()) {
        std::size_t reach = anchor + 1;
        for (std::size_t j = cells.size() - 1; j > anchor; --j) {
            if (line_of_sight(view, point_of(anchor), point_of(j))) {
                reach = j;
                break;
            }
        }
        waypoints.push_back(point_of(reach));
        anchor = reach;
    }
    return waypoints;
}

}  // namespace asip
