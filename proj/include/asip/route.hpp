#pragma once

#include <vector>

#include "asip/distance_field.hpp"
#include "asip/geometry.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Inflated occupancy view used for routing between clusters: a cell is
/// blocked when its distance to the nearest occupied cell falls below the
/// inflation radius. Endpoint cells are unblocked within a small radius so
/// viewpoints hugging a surface stay reachable.
class NavGrid {
public:
    NavGrid() = default;
    NavGrid(const GridSpec& spec, const std::vector<std::uint8_t>& occupied_mask,
            double inflation);

    static NavGrid from_grid(const OccupancyGrid& grid, double inflation);

    const GridSpec& spec() const { return spec_; }
    bool blocked(int idx) const { return blocked_[static_cast<std::size_t>(idx)] != 0; }
    const OccupancyGrid& as_grid() const { return inflated_; }

private:
    GridSpec spec_;
    std::vector<std::uint8_t> blocked_;
    OccupancyGrid inflated_;
};

/// A* shortest path (8-connected, no corner cutting) from start to goal over
/// the inflated grid, simplified to line-of-sight corner waypoints. Includes
/// start and goal. Returns an empty vector when no route exists.
std::vector<Vec2> route_waypoints(const NavGrid& nav, const Vec2& start, const Vec2& goal,
                                  double endpoint_unblock_radius);

}  // namespace asip
