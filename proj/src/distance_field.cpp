#include "asip/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asip {

namespace {

// Felzenszwalb & Huttenlocher 1D squared distance transform.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceField::DistanceField(const GridSpec& spec, const std::vector<std::uint8_t>& occupied_mask)
    : spec_(spec), dist_(static_cast<std::size_t>(spec.size()), 0.0) {
    const double inf = 1e12;
    const int w = spec.width, h = spec.height;
    std::vector<double> g(static_cast<std::size_t>(spec.size()));
    for (int i = 0; i < spec.size(); ++i)
        g[static_cast<std::size_t>(i)] = occupied_mask[static_cast<std::size_t>(i)] ? 0.0 : inf;

    const int n = std::max(w, h);
    std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n + 1));

    for (int x = 0; x < w; ++x) {  // columns
        f.resize(static_cast<std::size_t>(h));
        d.resize(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = g[static_cast<std::size_t>(y * w + x)];
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y * w + x)] = d[static_cast<std::size_t>(y)];
    }
    for (int y = 0; y < h; ++y) {  // rows
        f.resize(static_cast<std::size_t>(w));
        d.resize(static_cast<std::size_t>(w));
        for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = g[static_cast<std::size_t>(y * w + x)];
        edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x)
            dist_[static_cast<std::size_t>(y * w + x)] =
                std::sqrt(d[static_cast<std::size_t>(x)]) * spec.resolution;
    }
}

DistanceField DistanceField::from_grid(const OccupancyGrid& grid) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.spec().size()), 0);
    for (int i = 0; i < grid.spec().size(); ++i)
        if (grid.occupied(i)) mask[static_cast<std::size_t>(i)] = 1;
    return DistanceField(grid.spec(), mask);
}

DistanceField DistanceField::from_reference(const ReferenceMap& ref) {
    return from_grid(ref.as_grid());
}

void DistanceField::interp_setup(const Vec2& p, int& ix0, int& iy0, double& fx, double& fy) const {
    // Sample on the lattice of cell centers; clamp outside the lattice.
    const double gx = (p.x - spec_.origin.x) / spec_.resolution - 0.5;
    const double gy = (p.y - spec_.origin.y) / spec_.resolution - 0.5;
    const double cx = std::clamp(gx, 0.0, static_cast<double>(spec_.width - 1));
    const double cy = std::clamp(gy, 0.0, static_cast<double>(spec_.height - 1));
    ix0 = std::min(static_cast<int>(cx), spec_.width - 2);
    iy0 = std::min(static_cast<int>(cy), spec_.height - 2);
    ix0 = std::max(ix0, 0);
    iy0 = std::max(iy0, 0);
    fx = cx - ix0;
    fy = cy - iy0;
}

double DistanceField::sample(const Vec2& p) const {
    int ix0, iy0;
    double fx, fy;
    interp_setup(p, ix0, iy0, fx, fy);
    const int ix1 = std::min(ix0 + 1, spec_.width - 1), iy1 = std::min(iy0 + 1, spec_.height - 1);
    const double d00 = at_cell(spec_.index(ix0, iy0));
    const double d10 = at_cell(spec_.index(ix1, iy0));
    const double d01 = at_cell(spec_.index(ix0, iy1));
    const double d11 = at_cell(spec_.index(ix1, iy1));
    return d00 * (1 - fx) * (1 - fy) + d10 * fx * (1 - fy) + d01 * (1 - fx) * fy + d11 * fx * fy;
}

Vec2 DistanceField::gradient(const Vec2& p) const {
    int ix0, iy0;
    double fx, fy;
    interp_setup(p, ix0, iy0, fx, fy);
    const int ix1 = std::min(ix0 + 1, spec_.width - 1), iy1 = std::min(iy0 + 1, spec_.height - 1);
    const double d00 = at_cell(spec_.index(ix0, iy0));
    const double d10 = at_cell(spec_.index(ix1, iy0));
    const double d01 = at_cell(spec_.index(ix0, iy1));
    const double d11 = at_cell(spec_.index(ix1, iy1));
    const double ddx = ((d10 - d00) * (1 - fy) + (d11 - d01) * fy) / spec_.resolution;
    const double ddy = ((d01 - d00) * (1 - fx) + (d11 - d10) * fx) / spec_.resolution;
    return {ddx, ddy};
}

}  // namespace asip
