#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asip/geometry.hpp"

namespace asip {

enum class Occ : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

/// Discretization of the world: cell (0,0) has its lower-left corner at
/// `origin`, cells are square with side `resolution`.
struct GridSpec {
    double resolution = 0.1;
    int width = 0;
    int height = 0;
    Vec2 origin;

    int size() const { return width * height; }
    bool in_bounds(int ix, int iy) const { return ix >= 0 && ix < width && iy >= 0 && iy < height; }
    int index(int ix, int iy) const { return iy * width + ix; }
    int cell_x(int idx) const { return idx % width; }
    int cell_y(int idx) const { return idx / width; }

    int cell_of(const Vec2& p) const {
        const int ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
        const int iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
        if (!in_bounds(ix, iy)) return -1;
        return index(ix, iy);
    }
    Vec2 center_of(int idx) const {
        return {origin.x + (cell_x(idx) + 0.5) * resolution,
                origin.y + (cell_y(idx) + 0.5) * resolution};
    }
    bool contains(const Vec2& p) const { return cell_of(p) >= 0; }

    bool operator==(const GridSpec& o) const {
        return resolution == o.resolution && width == o.width && height == o.height &&
               origin == o.origin;
    }
};

/// Live occupancy state. Starts unknown; the simulator's sensing is the only
/// writer during a mission.
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    explicit OccupancyGrid(const GridSpec& spec, Occ fill = Occ::Unknown)
        : spec_(spec), state_(static_cast<std::size_t>(spec.size()), fill) {}

    const GridSpec& spec() const { return spec_; }
    Occ state(int idx) const { return state_[static_cast<std::size_t>(idx)]; }
    Occ state(int ix, int iy) const { return state_[static_cast<std::size_t>(spec_.index(ix, iy))]; }
    void set_state(int idx, Occ s) { state_[static_cast<std::size_t>(idx)] = s; }

    /// Sensing update: a traversed cell becomes free unless already occupied.
    void mark_free(int idx) {
        auto& s = state_[static_cast<std::size_t>(idx)];
        if (s != Occ::Occupied) s = Occ::Free;
    }
    /// Sensing update: a sensed return always marks the cell occupied.
    void mark_occupied(int idx) { state_[static_cast<std::size_t>(idx)] = Occ::Occupied; }

    bool occupied(int idx) const { return state(idx) == Occ::Occupied; }
    const std::vector<Occ>& cells() const { return state_; }

    bool operator==(const OccupancyGrid& o) const { return spec_ == o.spec_ && state_ == o.state_; }

private:
    GridSpec spec_;
    std::vector<Occ> state_;
};

/// Prior model of the scene: nominal structure plus the interior-facing
/// surface cells that constitute the inspection targets, each with a unit
/// normal (stored as an angle) pointing into interior free space.
class ReferenceMap {
public:
    ReferenceMap() = default;

    const GridSpec& spec() const { return spec_; }
    const std::vector<int>& target_cells() const { return target_cells_; }
    const std::vector<int>& boundary_cells() const { return boundary_cells_; }

    bool is_structure(int idx) const { return structure_[static_cast<std::size_t>(idx)] != 0; }
    bool is_target(int idx) const { return target_flag_[static_cast<std::size_t>(idx)] != 0; }
    bool is_interior_free(int idx) const { return interior_[static_cast<std::size_t>(idx)] != 0; }
    /// Normal angle of a target cell; only valid where is_target() holds.
    double normal(int idx) const { return normal_[static_cast<std::size_t>(idx)]; }

    /// The nominal scene viewed as a fully observed occupancy grid.
    const OccupancyGrid& as_grid() const { return nominal_grid_; }

    /// Builds the reference map from a structure mask. Interior free space is
    /// flood-filled (4-connectivity) from `interior_seed`; structure cells with
    /// at least one orthogonally adjacent interior free cell become targets.
    /// Normals average the directions toward interior free cells in the 5x5
    /// neighborhood, weighted by inverse squared distance.
    static ReferenceMap build(const GridSpec& spec, const std::vector<std::uint8_t>& structure,
                              const Vec2& interior_seed);

private:
    GridSpec spec_;
    std::vector<std::uint8_t> structure_;
    std::vector<std::uint8_t> interior_;
    std::vector<std::uint8_t> target_flag_;
    std::vector<double> normal_;
    std::vector<int> target_cells_;
    std::vector<int> boundary_cells_;
    OccupancyGrid nominal_grid_;
};

/// Horizontal field of view, range and ray budget of the inspection camera.
struct SensorModel {
    double fov = 1.5;
    double max_range = 4.0;
    int ray_count = 64;
};

struct RaycastHit {
    double distance = 0.0;
    std::optional<int> cell;  // first occupied cell, empty on no-hit
};

/// Casts a ray through the grid (Amanatides-Woo traversal) and returns the
/// first occupied cell, or no-hit with distance = max_range. Unknown cells do
/// not block. Throws std::out_of_range("origin outside grid") when the origin
/// lies outside the grid.
RaycastHit raycast(const OccupancyGrid& grid, const Vec2& origin, double angle, double max_range);

/// True iff no occupied cell other than the cell containing b lies on the
/// segment a->b. Throws std::out_of_range on out-of-bounds endpoints.
bool line_of_sight(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

/// Target cells observable from `pose`: within the sensor cone and range, with
/// line of sight through `grid`. Returned sorted by cell index.
std::vector<int> visible_cells(const OccupancyGrid& grid, const ReferenceMap& ref,
                               const Pose& pose, const SensorModel& sensor);

/// Grid text format: header `grid <w> <h> <res> <ox> <oy>` then `height` rows
/// of `width` chars, row 0 = minimum-y row. Chars: '.' free, '#' structure,
/// 'T' target surface, '?' unknown.
std::string serialize_grid(const OccupancyGrid& grid);
std::string serialize_reference(const ReferenceMap& ref);
OccupancyGrid parse_grid(const std::string& text);
/// Parses a reference grid; target rows are rebuilt from the 'T' marks and
/// normals are recomputed from adjacency, so serialize/parse round-trips.
ReferenceMap parse_reference(const std::string& text, const Vec2& interior_seed);

}  // namespace asip
