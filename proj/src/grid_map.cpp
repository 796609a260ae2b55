#include "asip/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "asip/errors.hpp"

namespace asip {

namespace {

constexpr int kNeighbors8[8][2] = {{1, 0},  {0, 1},  {-1, 0}, {0, -1},
                                   {1, 1},  {-1, 1}, {-1, -1}, {1, -1}};

}  // namespace

ReferenceMap ReferenceMap::build(const GridSpec& spec, const std::vector<std::uint8_t>& structure,
                                 const Vec2& interior_seed) {
    if (spec.resolution <= 0.0 || spec.width < 1 || spec.height < 1)
        throw std::invalid_argument("invalid grid spec");
    if (static_cast<int>(structure.size()) != spec.size())
        throw std::invalid_argument("structure mask size mismatch");

    ReferenceMap ref;
    ref.spec_ = spec;
    ref.structure_ = structure;
    ref.interior_.assign(structure.size(), 0);
    ref.target_flag_.assign(structure.size(), 0);
    ref.normal_.assign(structure.size(), 0.0);

    // Interior free region: 4-connected flood fill from the seed.
    const int seed = spec.cell_of(interior_seed);
    if (seed < 0 || structure[static_cast<std::size_t>(seed)])
        throw std::invalid_argument("interior seed not in free space");
    std::deque<int> queue{seed};
    ref.interior_[static_cast<std::size_t>(seed)] = 1;
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        const int cx = spec.cell_x(c), cy = spec.cell_y(c);
        for (int k = 0; k < 4; ++k) {
            const int nx = cx + kNeighbors8[k][0], ny = cy + kNeighbors8[k][1];
            if (!spec.in_bounds(nx, ny)) continue;
            const int n = spec.index(nx, ny);
            if (structure[static_cast<std::size_t>(n)] || ref.interior_[static_cast<std::size_t>(n)]) continue;
            ref.interior_[static_cast<std::size_t>(n)] = 1;
            queue.push_back(n);
        }
    }

    // Targets: structure cells with an orthogonally adjacent interior free
    // cell. The normal averages directions toward interior free cells in the
    // 5x5 window (inverse squared distance weights), which keeps normals
    // smooth along rasterized curves.
    for (int iy = 0; iy < spec.height; ++iy) {
        for (int ix = 0; ix < spec.width; ++ix) {
            const int c = spec.index(ix, iy);
            if (!structure[static_cast<std::size_t>(c)]) continue;
            bool orth_free = false;
            for (int k = 0; k < 4 && !orth_free; ++k) {
                const int nx = ix + kNeighbors8[k][0], ny = iy + kNeighbors8[k][1];
                orth_free = spec.in_bounds(nx, ny) &&
                            ref.interior_[static_cast<std::size_t>(spec.index(nx, ny))] != 0;
            }
            if (!orth_free) continue;

            Vec2 sum;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = ix + dx, ny = iy + dy;
                    if (!spec.in_bounds(nx, ny)) continue;
                    if (!ref.interior_[static_cast<std::size_t>(spec.index(nx, ny))]) continue;
                    const double d2 = static_cast<double>(dx * dx + dy * dy);
                    sum += Vec2(dx, dy) * (1.0 / (d2 * std::sqrt(d2)));
                }
            }
            if (sum.norm() < 1e-9) continue;  // no dominant side
            const double normal = sum.angle();

            // Stepping one cell along the normal must land in interior free
            // space; drop the cell from the target set otherwise.
            const int sx = ix + static_cast<int>(std::lround(std::cos(normal)));
            const int sy = iy + static_cast<int>(std::lround(std::sin(normal)));
            if (!spec.in_bounds(sx, sy) ||
                !ref.interior_[static_cast<std::size_t>(spec.index(sx, sy))])
                continue;

            ref.target_flag_[static_cast<std::size_t>(c)] = 1;
            ref.normal_[static_cast<std::size_t>(c)] = normal;
            ref.target_cells_.push_back(c);
        }
    }

    // Boundary cells: structure on the grid rim.
    for (int iy = 0; iy < spec.height; ++iy) {
        for (int ix = 0; ix < spec.width; ++ix) {
            if (ix == 0 || iy == 0 || ix == spec.width - 1 || iy == spec.height - 1) {
                const int c = spec.index(ix, iy);
                if (structure[static_cast<std::size_t>(c)]) ref.boundary_cells_.push_back(c);
            }
        }
    }

    ref.nominal_grid_ = OccupancyGrid(spec, Occ::Free);
    for (int c = 0; c < spec.size(); ++c)
        if (structure[static_cast<std::size_t>(c)]) ref.nominal_grid_.mark_occupied(c);
    return ref;
}

RaycastHit raycast(const OccupancyGrid& grid, const Vec2& origin, double angle, double max_range) {
    const GridSpec& spec = grid.spec();
    const int start = spec.cell_of(origin);
    if (start < 0) throw std::out_of_range("origin outside grid");

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

    // The origin cell is free or unknown by precondition; if occupied anyway,
    // report an immediate hit.
    if (grid.occupied(start)) return {0.0, start};

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
        if (t_entry > max_range) return {max_range, std::nullopt};
        if (!spec.in_bounds(ix, iy)) return {max_range, std::nullopt};
        const int c = spec.index(ix, iy);
        if (grid.occupied(c)) return {t_entry, c};
    }
}

bool line_of_sight(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
    const GridSpec& spec = grid.spec();
    const int ca = spec.cell_of(a);
    const int cb = spec.cell_of(b);
    if (ca < 0 || cb < 0) throw std::out_of_range("line_of_sight endpoint outside grid");
    if (ca == cb) return true;

    const Vec2 d = b - a;
    const double len = d.norm();
    const Vec2 dir = d / len;
    int ix = spec.cell_x(ca), iy = spec.cell_y(ca);
    const int bx = spec.cell_x(cb), by = spec.cell_y(cb);
    const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
    const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);

    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double edge = spec.origin.x + (ix + (step_x > 0 ? 1 : 0)) * spec.resolution;
        t_max_x = (edge - a.x) / dir.x;
        t_delta_x = spec.resolution / std::abs(dir.x);
    }
    if (step_y != 0) {
        const double edge = spec.origin.y + (iy + (step_y > 0 ? 1 : 0)) * spec.resolution;
        t_max_y = (edge - a.y) / dir.y;
        t_delta_y = spec.resolution / std::abs(dir.y);
    }

    if (grid.occupied(ca)) return false;
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
        // Past b without an occupied cell (covers edge-grazing endpoints).
        if (t_entry >= len || !spec.in_bounds(ix, iy)) return true;
        if (ix == bx && iy == by) return true;
        if (grid.occupied(spec.index(ix, iy))) return false;
    }
}

std::vector<int> visible_cells(const OccupancyGrid& grid, const ReferenceMap& ref,
                               const Pose& pose, const SensorModel& sensor) {
    std::vector<int> out;
    const GridSpec& spec = grid.spec();
    const double range2 = sensor.max_range * sensor.max_range;
    const double half_fov = 0.5 * sensor.fov;
    for (int c : ref.target_cells()) {
        const Vec2 center = spec.center_of(c);
        const Vec2 d = center - pose.position;
        if (d.squared_norm() > range2) continue;
        if (angular_distance(d.angle(), pose.yaw) > half_fov) continue;
        if (!line_of_sight(grid, pose.position, center)) continue;
        out.push_back(c);
    }
    return out;
}

namespace {

void write_grid_header(std::ostringstream& os, const GridSpec& spec) {
    os.precision(17);
    os << "grid " << spec.width << ' ' << spec.height << ' ' << spec.resolution << ' '
       << spec.origin.x << ' ' << spec.origin.y << '\n';
}

}  // namespace

std::string serialize_grid(const OccupancyGrid& grid) {
    std::ostringstream os;
    write_grid_header(os, grid.spec());
    for (int iy = 0; iy < grid.spec().height; ++iy) {
        for (int ix = 0; ix < grid.spec().width; ++ix) {
            switch (grid.state(ix, iy)) {
                case Occ::Free: os << '.'; break;
                case Occ::Occupied: os << '#'; break;
                case Occ::Unknown: os << '?'; break;
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string serialize_reference(const ReferenceMap& ref) {
    std::ostringstream os;
    write_grid_header(os, ref.spec());
    for (int iy = 0; iy < ref.spec().height; ++iy) {
        for (int ix = 0; ix < ref.spec().width; ++ix) {
            const int c = ref.spec().index(ix, iy);
            if (ref.is_target(c))
                os << 'T';
            else if (ref.is_structure(c))
                os << '#';
            else
                os << '.';
        }
        os << '\n';
    }
    return os.str();
}

namespace {

GridSpec parse_grid_header(std::istringstream& is) {
    std::string tag;
    GridSpec spec;
    is >> tag >> spec.width >> spec.height >> spec.resolution >> spec.origin.x >> spec.origin.y;
    if (tag != "grid" || !is || spec.width < 1 || spec.height < 1 || spec.resolution <= 0.0)
        throw std::invalid_argument("malformed grid header");
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    return spec;
}

std::vector<std::string> parse_grid_rows(std::istringstream& is, const GridSpec& spec) {
    std::vector<std::string> rows;
    std::string line;
    while (static_cast<int>(rows.size()) < spec.height && std::getline(is, line)) {
        if (static_cast<int>(line.size()) != spec.width)
            throw std::invalid_argument("grid row width mismatch");
        rows.push_back(line);
    }
    if (static_cast<int>(rows.size()) != spec.height)
        throw std::invalid_argument("grid row count mismatch");
    return rows;
}

}  // namespace

OccupancyGrid parse_grid(const std::string& text) {
    std::istringstream is(text);
    const GridSpec spec = parse_grid_header(is);
    const auto rows = parse_grid_rows(is, spec);
    OccupancyGrid grid(spec, Occ::Unknown);
    for (int iy = 0; iy < spec.height; ++iy) {
        for (int ix = 0; ix < spec.width; ++ix) {
            switch (rows[static_cast<std::size_t>(iy)][static_cast<std::size_t>(ix)]) {
                case '.': grid.set_state(spec.index(ix, iy), Occ::Free); break;
                case '#':
                case 'T': grid.set_state(spec.index(ix, iy), Occ::Occupied); break;
                case '?': grid.set_state(spec.index(ix, iy), Occ::Unknown); break;
                default: throw std::invalid_argument("unknown grid character");
            }
        }
    }
    return grid;
}

ReferenceMap parse_reference(const std::string& text, const Vec2& interior_seed) {
    std::istringstream is(text);
    const GridSpec spec = parse_grid_header(is);
    const auto rows = parse_grid_rows(is, spec);
    std::vector<std::uint8_t> structure(static_cast<std::size_t>(spec.size()), 0);
    std::vector<std::uint8_t> target_marks(static_cast<std::size_t>(spec.size()), 0);
    for (int iy = 0; iy < spec.height; ++iy) {
        for (int ix = 0; ix < spec.width; ++ix) {
            const char ch = rows[static_cast<std::size_t>(iy)][static_cast<std::size_t>(ix)];
            const int c = spec.index(ix, iy);
            if (ch == '#' || ch == 'T') structure[static_cast<std::size_t>(c)] = 1;
            if (ch == 'T') target_marks[static_cast<std::size_t>(c)] = 1;
            if (ch != '#' && ch != 'T' && ch != '.' && ch != '?')
                throw std::invalid_argument("unknown grid character");
        }
    }
    ReferenceMap ref = ReferenceMap::build(spec, structure, interior_seed);
    for (int c = 0; c < spec.size(); ++c) {
        if (target_marks[static_cast<std::size_t>(c)] != (ref.is_target(c) ? 1 : 0))
            throw InvariantError("reference target marks inconsistent with construction");
    }
    return ref;
}

}  // namespace asip
