#pragma once

#include <vector>

#include "asip/geometry.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Euclidean distance (meters) from each cell center to the nearest occupied
/// cell center, with bilinear sampling for continuous queries. Built once per
/// map; query is O(1).
class DistanceField {
public:
    DistanceField() = default;
    DistanceField(const GridSpec& spec, const std::vector<std::uint8_t>& occupied_mask);

    static DistanceField from_grid(const OccupancyGrid& grid);
    static DistanceField from_reference(const ReferenceMap& ref);

    const GridSpec& spec() const { return spec_; }
    double at_cell(int idx) const { return dist_[static_cast<std::size_t>(idx)]; }

    /// Bilinearly interpolated distance at a world point (clamped to the grid).
    double sample(const Vec2& p) const;
    /// Analytic gradient of the bilinear surface at p.
    Vec2 gradient(const Vec2& p) const;

private:
    void interp_setup(const Vec2& p, int& ix0, int& iy0, double& fx, double& fy) const;

    GridSpec spec_;
    std::vector<double> dist_;
};

}  // namespace asip
