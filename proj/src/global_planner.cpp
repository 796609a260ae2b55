#include "asip/global_planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "asip/errors.hpp"

namespace asip {

namespace {

constexpr int kOffsets8[8][2] = {{1, 0},  {0, 1},  {-1, 0}, {0, -1},
                                 {1, 1},  {-1, 1}, {-1, -1}, {1, -1}};

double pose_metric(const Viewpoint& a, const Viewpoint& b, double yaw_weight) {
    return (a.position - b.position).norm() + yaw_weight * angular_distance(a.yaw, b.yaw);
}

// Circular standard deviation of the normals in the 5x5 window around a
// target cell; serves as the curvature proxy for region-growing seeds.
std::vector<double> curvature_proxy(const ReferenceMap& ref) {
    const GridSpec& spec = ref.spec();
    std::vector<double> curv(static_cast<std::size_t>(spec.size()), 0.0);
    for (int c : ref.target_cells()) {
        const int cx = spec.cell_x(c), cy = spec.cell_y(c);
        double sum_cos = 0.0, sum_sin = 0.0;
        int count = 0;
        for (int dy = -2; dy <= 2; ++dy) {
            for (int dx = -2; dx <= 2; ++dx) {
                const int nx = cx + dx, ny = cy + dy;
                if (!spec.in_bounds(nx, ny)) continue;
                const int n = spec.index(nx, ny);
                if (!ref.is_target(n)) continue;
                sum_cos += std::cos(ref.normal(n));
                sum_sin += std::sin(ref.normal(n));
                ++count;
            }
        }
        const double r = std::hypot(sum_cos, sum_sin) / std::max(count, 1);
        curv[static_cast<std::size_t>(c)] = std::sqrt(std::max(0.0, -2.0 * std::log(std::max(r, 1e-12))));
    }
    return curv;
}

// Orders a connected set of surface cells along the surface: starts at an
// endpoint (fewest in-set neighbors, lowest index) and greedily walks to the
// nearest unvisited adjacent member.
std::vector<int> order_along_surface(const std::vector<int>& cells, const GridSpec& spec) {
    if (cells.size() <= 1) return cells;
    std::vector<int> sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    auto in_set = [&](int c) { return std::binary_search(sorted.begin(), sorted.end(), c); };

    int start = sorted.front();
    int best_degree = 9;
    for (int c : sorted) {
        int deg = 0;
        const int cx = spec.cell_x(c), cy = spec.cell_y(c);
        for (auto& off : kOffsets8) {
            const int nx = cx + off[0], ny = cy + off[1];
            if (spec.in_bounds(nx, ny) && in_set(spec.index(nx, ny))) ++deg;
        }
        if (deg < best_degree) {
            best_degree = deg;
            start = c;
        }
    }

    std::vector<int> order;
    order.reserve(cells.size());
    std::vector<int> pending = sorted;
    auto erase_pending = [&](int c) {
        pending.erase(std::lower_bound(pending.begin(), pending.end(), c));
    };
    int current = start;
    erase_pending(current);
    order.push_back(current);
    while (!pending.empty()) {
        const Vec2 cur = spec.center_of(current);
        int next = -1;
        double best = std::numeric_limits<double>::infinity();
        const int cx = spec.cell_x(current), cy = spec.cell_y(current);
        for (auto& off : kOffsets8) {
            const int nx = cx + off[0], ny = cy + off[1];
            if (!spec.in_bounds(nx, ny)) continue;
            const int n = spec.index(nx, ny);
            if (!std::binary_search(pending.begin(), pending.end(), n)) continue;
            const double d = (spec.center_of(n) - cur).norm();
            if (d < best || (d == best && n < next)) {
                best = d;
                next = n;
            }
        }
        if (next < 0) {
            // Disconnected remainder of a blob-shaped region; jump to the
            // nearest pending cell to keep the walk total.
            for (int n : pending) {
                const double d = (spec.center_of(n) - cur).norm();
                if (d < best || (d == best && n < next)) {
                    best = d;
                    next = n;
                }
            }
        }
        current = next;
        erase_pending(current);
        order.push_back(current);
    }
    return order;
}

}  // namespace

double viewpoint_spacing(const GlobalPlannerParams& params, const SensorModel& sensor) {
    if (params.spacing > 0.0) return params.spacing;
    return 2.0 * params.standoff * std::tan(0.5 * sensor.fov) * (1.0 - params.fov_overlap);
}

std::vector<Segment> map_segmentation(const ReferenceMap& ref, const GlobalPlannerParams& params) {
    const GridSpec& spec = ref.spec();
    const auto& targets = ref.target_cells();
    std::vector<Segment> segments;
    if (targets.empty()) return segments;

    const std::vector<double> curv = curvature_proxy(ref);
    std::vector<int> seeds = targets;
    std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) {
        const double ca = curv[static_cast<std::size_t>(a)], cb = curv[static_cast<std::size_t>(b)];
        return ca < cb || (ca == cb && a < b);
    });

    std::vector<std::uint8_t> assigned(static_cast<std::size_t>(spec.size()), 0);
    for (int seed : seeds) {
        if (assigned[static_cast<std::size_t>(seed)]) continue;
        Segment seg;
        seg.id = static_cast<int>(segments.size());
        double sum_cos = std::cos(ref.normal(seed));
        double sum_sin = std::sin(ref.normal(seed));
        std::deque<int> queue{seed};
        assigned[static_cast<std::size_t>(seed)] = 1;
        std::vector<int> members{seed};
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            const int cx = spec.cell_x(c), cy = spec.cell_y(c);
            for (auto& off : kOffsets8) {
                const int nx = cx + off[0], ny = cy + off[1];
                if (!spec.in_bounds(nx, ny)) continue;
                const int n = spec.index(nx, ny);
                if (!ref.is_target(n) || assigned[static_cast<std::size_t>(n)]) continue;
                const double mean = circular_mean(sum_cos, sum_sin);
                if (angular_distance(ref.normal(n), mean) > params.region_angle_threshold) continue;
                assigned[static_cast<std::size_t>(n)] = 1;
                sum_cos += std::cos(ref.normal(n));
                sum_sin += std::sin(ref.normal(n));
                members.push_back(n);
                queue.push_back(n);
            }
        }

        seg.cells = order_along_surface(members, spec);
        seg.cell_normals.reserve(seg.cells.size());
        for (int c : seg.cells) seg.cell_normals.push_back(ref.normal(c));
        seg.mean_normal = circular_mean(sum_cos, sum_sin);

        // Principal orientation from the spread of member centers.
        Vec2 centroid;
        for (int c : seg.cells) centroid += spec.center_of(c);
        centroid *= 1.0 / static_cast<double>(seg.cells.size());
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int c : seg.cells) {
            const Vec2 d = spec.center_of(c) - centroid;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        seg.principal_orientation = 0.5 * std::atan2(2.0 * sxy, sxx - syy);

        seg.arc_length = 0.0;
        for (std::size_t i = 1; i < seg.cells.size(); ++i)
            seg.arc_length +=
                (spec.center_of(seg.cells[i]) - spec.center_of(seg.cells[i - 1])).norm();

        segments.push_back(std::move(seg));
    }
    return segments;
}

std::vector<Viewpoint> generate_viewpoints(const Segment& segment,
                                           const GlobalPlannerParams& params,
                                           const SensorModel& sensor, const ReferenceMap& ref) {
    std::vector<Viewpoint> out;
    if (segment.cells.empty()) return out;
    const GridSpec& spec = ref.spec();
    const double spacing = viewpoint_spacing(params, sensor);

    // Cumulative arc length over the ordered member centers.
    std::vector<Vec2> pts;
    pts.reserve(segment.cells.size());
    for (int c : segment.cells) pts.push_back(spec.center_of(c));
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    const double total = cum.back();

    std::vector<double> samples;
    if (total <= spacing) {
        samples.push_back(0.5 * total);
    } else {
        double s = 0.0;
        for (; s <= total + 1e-9; s += spacing) samples.push_back(std::min(s, total));
        const double residual = total - samples.back();
        if (residual > 0.5 * spacing) samples.push_back(total);
    }

    auto interp = [&](double s, Vec2& point, double& normal) {
        std::size_t i = 1;
        while (i < cum.size() && cum[i] < s) ++i;
        if (i >= cum.size()) i = cum.size() - 1;
        const double seg_len = cum[i] - cum[i - 1];
        const double t = seg_len > 0.0 ? (s - cum[i - 1]) / seg_len : 0.0;
        point = pts[i - 1] + (pts[i] - pts[i - 1]) * t;
        const Vec2 blended = unit_vector(segment.cell_normals[i - 1]) * (1.0 - t) +
                             unit_vector(segment.cell_normals[i]) * t;
        normal = blended.norm() > 1e-9 ? blended.angle() : segment.cell_normals[i - 1];
    };

    const OccupancyGrid& nominal = ref.as_grid();
    for (double s : samples) {
        Vec2 surface;
        double normal;
        if (pts.size() == 1) {
            surface = pts[0];
            normal = segment.cell_normals[0];
        } else {
            interp(s, surface, normal);
        }
        const Vec2 n = unit_vector(normal);

        Viewpoint vp;
        vp.source_segment = segment.id;
        vp.surface_point = surface;

        bool placed = false;
        const Vec2 direct = surface + n * params.standoff;
        const int direct_cell = spec.cell_of(direct);
        if (direct_cell >= 0 && ref.is_interior_free(direct_cell) &&
            line_of_sight(nominal, direct, surface)) {
            vp.position = direct;
            placed = true;
        } else {
            // Pull inward along the normal to the nearest free cell center
            // that still sees the surface point.
            for (double t = params.standoff - 0.5 * spec.resolution; t > 0.25 * spec.resolution;
                 t -= 0.5 * spec.resolution) {
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
        vp.surface_index = static_cast<int>(out.size());
        out.push_back(vp);
    }
    return out;
}

double tour_cost(const std::vector<Viewpoint>& viewpoints, const std::vector<int>& order,
                 double yaw_weight) {
    double cost = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i)
        cost += pose_metric(viewpoints[static_cast<std::size_t>(order[i - 1])],
                            viewpoints[static_cast<std::size_t>(order[i])], yaw_weight);
    return cost;
}

std::vector<int> solve_tsp(const std::vector<Viewpoint>& viewpoints, const Vec2& start,
                           const GlobalPlannerParams& params) {
    const int n = static_cast<int>(viewpoints.size());
    if (n == 0) return {};
    if (n == 1) return {0};

    std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i) * n + j] =
                pose_metric(viewpoints[static_cast<std::size_t>(i)],
                            viewpoints[static_cast<std::size_t>(j)], params.yaw_weight);
    auto c = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };

    // Nearest-neighbor construction, anchored at the viewpoint nearest start.
    int first = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d = (viewpoints[static_cast<std::size_t>(i)].position - start).norm();
        if (d < best_d) {
            best_d = d;
            first = i;
        }
    }
    std::vector<int> tour{first};
    std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
    used[static_cast<std::size_t>(first)] = 1;
    while (static_cast<int>(tour.size()) < n) {
        const int cur = tour.back();
        int next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            if (c(cur, j) < best) {
                best = c(cur, j);
                next = j;
            }
        }
        used[static_cast<std::size_t>(next)] = 1;
        tour.push_back(next);
    }

    // 2-opt + Or-opt local search on the open tour; the first position stays
    // anchored. First-improvement, bounded by the move budget.
    const long budget = params.tsp_move_budget_factor * static_cast<long>(n) * n;
    long examined = 0;
    bool improved = true;
    const double eps = 1e-12;
    while (improved && examined < budget) {
        improved = false;
        // 2-opt: reverse tour[i..j].
        for (int i = 1; i < n - 1 && examined < budget; ++i) {
            for (int j = i + 1; j < n && examined < budget; ++j) {
                ++examined;
                const int a = tour[static_cast<std::size_t>(i - 1)];
                const int b = tour[static_cast<std::size_t>(i)];
                const int d = tour[static_cast<std::size_t>(j)];
                double delta = c(a, d) - c(a, b);
                if (j + 1 < n) {
                    const int e = tour[static_cast<std::size_t>(j + 1)];
                    delta += c(b, e) - c(d, e);
                }
                if (delta < -eps) {
                    std::reverse(tour.begin() + i, tour.begin() + j + 1);
                    improved = true;
                }
            }
        }
        // Or-opt: relocate chains of length 1..3.
        for (int len = 1; len <= 3 && examined < budget; ++len) {
            for (int i = 1; i + len <= n && examined < budget; ++i) {
                const int a = tour[static_cast<std::size_t>(i - 1)];
                const int b = tour[static_cast<std::size_t>(i)];
                const int e = tour[static_cast<std::size_t>(i + len - 1)];
                const double gap_after = i + len < n
                                             ? c(e, tour[static_cast<std::size_t>(i + len)])
                                             : 0.0;
                const double bridge = i + len < n
                                          ? c(a, tour[static_cast<std::size_t>(i + len)])
                                          : 0.0;
                const double removed = c(a, b) + gap_after;
                for (int k = 0; k < n - 1 && examined < budget; ++k) {
                    if (k >= i - 1 && k <= i + len - 1) continue;
                    ++examined;
                    const int u = tour[static_cast<std::size_t>(k)];
                    const int v = tour[static_cast<std::size_t>(k + 1)];
                    // Chain removed between a and its successor, re-inserted
                    // between u and v (v's slot shifts when k > chain).
                    const double delta = bridge - removed - c(u, v) + c(u, b) + c(e, v);
                    if (delta < -eps) {
                        std::vector<int> chain(tour.begin() + i, tour.begin() + i + len);
                        tour.erase(tour.begin() + i, tour.begin() + i + len);
                        const int insert_at = k > i + len - 1 ? k - len + 1 : k + 1;
                        tour.insert(tour.begin() + insert_at, chain.begin(), chain.end());
                        improved = true;
                        break;
                    }
                }
                if (improved) break;
            }
            if (improved) break;
        }
    }
    return tour;
}

std::vector<Cluster> remap(const std::vector<int>& order,
                           const std::vector<Viewpoint>& viewpoints) {
    std::vector<Cluster> clusters;
    for (int idx : order) {
        const int seg = viewpoints[static_cast<std::size_t>(idx)].source_segment;
        if (clusters.empty() || clusters.back().source_segment != seg) {
            Cluster c;
            c.id = static_cast<int>(clusters.size());
            c.source_segment = seg;
            clusters.push_back(c);
        }
        clusters.back().viewpoints.push_back(idx);
    }
    return clusters;
}

namespace {

Vec2 cluster_centroid(const Cluster& c, const std::vector<Viewpoint>& viewpoints) {
    Vec2 sum;
    for (int v : c.viewpoints) sum += viewpoints[static_cast<std::size_t>(v)].position;
    return sum / static_cast<double>(c.viewpoints.size());
}

bool contiguous_union(const Cluster& a, const Cluster& b,
                      const std::vector<Viewpoint>& viewpoints) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    const auto count = a.viewpoints.size() + b.viewpoints.size();
    for (const Cluster* c : {&a, &b}) {
        for (int v : c->viewpoints) {
            const int s = viewpoints[static_cast<std::size_t>(v)].surface_index;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    return hi - lo + 1 == static_cast<int>(count);
}

}  // namespace

std::vector<Cluster> merge_outliers(const std::vector<Cluster>& clusters,
                                    const std::vector<Viewpoint>& viewpoints, int tau) {
    std::vector<Cluster> out = clusters;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (static_cast<int>(out[i].viewpoints.size()) >= tau) continue;
            const Vec2 ci = cluster_centroid(out[i], viewpoints);
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (j == i || out[j].source_segment != out[i].source_segment) continue;
                if (!contiguous_union(out[i], out[j], viewpoints)) continue;
                const double d = (cluster_centroid(out[j], viewpoints) - ci).norm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(j);
                }
            }
            if (best < 0) continue;
            // Fuse into the sibling's slot; the fused run is kept in surface
            // order so downstream reordering starts from a sane sequence.
            auto& host = out[static_cast<std::size_t>(best)];
            host.viewpoints.insert(host.viewpoints.end(), out[i].viewpoints.begin(),
                                   out[i].viewpoints.end());
            std::sort(host.viewpoints.begin(), host.viewpoints.end(), [&](int a, int b) {
                return viewpoints[static_cast<std::size_t>(a)].surface_index <
                       viewpoints[static_cast<std::size_t>(b)].surface_index;
            });
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
            break;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
    return out;
}

std::vector<int> reorder_chain(const std::vector<Vec2>& points, const Vec2* entry,
                               const Vec2* exit) {
    const int m = static_cast<int>(points.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    if (m <= 1) return order;

    auto d = [&](int i, int j) { return (points[static_cast<std::size_t>(i)] -
                                         points[static_cast<std::size_t>(j)]).norm(); };
    auto d_entry = [&](int i) { return entry ? (*entry - points[static_cast<std::size_t>(i)]).norm() : 0.0; };
    auto d_exit = [&](int i) { return exit ? (*exit - points[static_cast<std::size_t>(i)]).norm() : 0.0; };

    if (m <= 10) {
        // Held-Karp over subsets; free start when no entry anchor.
        const int full = (1 << m) - 1;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dp(static_cast<std::size_t>(full + 1) * m, inf);
        std::vector<int> parent(static_cast<std::size_t>(full + 1) * m, -1);
        auto at = [&](int mask, int last) -> double& {
            return dp[static_cast<std::size_t>(mask) * m + last];
        };
        for (int i = 0; i < m; ++i) at(1 << i, i) = d_entry(i);
        for (int mask = 1; mask <= full; ++mask) {
            for (int last = 0; last < m; ++last) {
                if (!(mask & (1 << last))) continue;
                const double base = at(mask, last);
                if (base == inf) continue;
                for (int j = 0; j < m; ++j) {
                    if (mask & (1 << j)) continue;
                    const int nm = mask | (1 << j);
                    const double cand = base + d(last, j);
                    if (cand < at(nm, j)) {
                        at(nm, j) = cand;
                        parent[static_cast<std::size_t>(nm) * m + j] = last;
                    }
                }
            }
        }
        int best_last = 0;
        double best = inf;
        for (int i = 0; i < m; ++i) {
            const double cand = at(full, i) + d_exit(i);
            if (cand < best) {
                best = cand;
                best_last = i;
            }
        }
        std::vector<int> rev;
        int mask = full, last = best_last;
        while (last >= 0) {
            rev.push_back(last);
            const int p = parent[static_cast<std::size_t>(mask) * m + last];
            mask &= ~(1 << last);
            last = p;
        }
        std::reverse(rev.begin(), rev.end());
        return rev;
    }

    // 2-opt with the anchors as virtual fixed endpoints.
    auto chain_cost = [&](const std::vector<int>& ord) {
        double cost = d_entry(ord.front()) + d_exit(ord.back());
        for (std::size_t i = 1; i < ord.size(); ++i) cost += d(ord[i - 1], ord[i]);
        return cost;
    };
    double current = chain_cost(order);
    bool improved = true;
    long examined = 0;
    const long budget = 50L * m * m;
    while (improved && examined < budget) {
        improved = false;
        for (int i = 0; i < m - 1 && !improved; ++i) {
            for (int j = i + 1; j < m && !improved; ++j) {
                ++examined;
                std::vector<int> cand = order;
                std::reverse(cand.begin() + i, cand.begin() + j + 1);
                const double cost = chain_cost(cand);
                if (cost < current - 1e-12) {
                    order = std::move(cand);
                    current = cost;
                    improved = true;
                }
            }
        }
    }
    return order;
}

InspectionPlan local_reorder(const std::vector<Cluster>& clusters,
                             const std::vector<Viewpoint>& viewpoints) {
    InspectionPlan plan;
    plan.viewpoints = viewpoints;
    plan.clusters = clusters;

    const Vec2* prev_exit = nullptr;
    Vec2 prev_exit_storage;
    for (std::size_t k = 0; k < plan.clusters.size(); ++k) {
        auto& cluster = plan.clusters[k];
        std::vector<Vec2> pts;
        pts.reserve(cluster.viewpoints.size());
        for (int v : cluster.viewpoints) pts.push_back(viewpoints[static_cast<std::size_t>(v)].position);

        Vec2 exit_storage;
        const Vec2* exit = nullptr;
        if (k + 1 < plan.clusters.size()) {
            const int next_entry = plan.clusters[k + 1].viewpoints.front();
            exit_storage = viewpoints[static_cast<std::size_t>(next_entry)].position;
            exit = &exit_storage;
        }

        const std::vector<int> order = reorder_chain(pts, prev_exit, exit);
        std::vector<int> reordered;
        reordered.reserve(cluster.viewpoints.size());
        for (int idx : order) reordered.push_back(cluster.viewpoints[static_cast<std::size_t>(idx)]);
        cluster.viewpoints = std::move(reordered);

        prev_exit_storage = viewpoints[static_cast<std::size_t>(cluster.viewpoints.back())].position;
        prev_exit = &prev_exit_storage;
    }

    for (std::size_t k = 0; k < plan.clusters.size(); ++k) {
        plan.clusters[k].id = static_cast<int>(k);
        plan.entry_viewpoint.push_back(plan.clusters[k].viewpoints.front());
        for (int v : plan.clusters[k].viewpoints) plan.flat_order.push_back(v);
    }
    return plan;
}

InspectionPlan plan_global(const ReferenceMap& ref, const GlobalPlannerParams& params,
                           const SensorModel& sensor, const Vec2& start) {
    const std::vector<Segment> segments = map_segmentation(ref, params);
    std::vector<Viewpoint> viewpoints;
    for (const Segment& seg : segments) {
        const auto vps = generate_viewpoints(seg, params, sensor, ref);
        viewpoints.insert(viewpoints.end(), vps.begin(), vps.end());
    }
    if (viewpoints.empty()) return {};

    const std::vector<int> order = solve_tsp(viewpoints, start, params);
    std::vector<Cluster> clusters = remap(order, viewpoints);
    for (int tau = params.tau_init; tau <= params.tau_max; ++tau)
        clusters = merge_outliers(clusters, viewpoints, tau);
    return local_reorder(clusters, viewpoints);
}

std::string serialize_plan(const InspectionPlan& plan) {
    std::ostringstream os;
    os.precision(17);
    os << "plan " << plan.clusters.size() << '\n';
    for (const Cluster& c : plan.clusters) {
        os << "cluster " << c.id << ' ' << c.source_segment << ' ' << c.viewpoints.size() << '\n';
        for (int v : c.viewpoints) {
            const Viewpoint& vp = plan.viewpoints[static_cast<std::size_t>(v)];
            os << vp.position.x << ' ' << vp.position.y << ' ' << vp.yaw << ' '
               << vp.source_segment << '\n';
        }
    }
    return os.str();
}

InspectionPlan parse_plan(const std::string& text, const ReferenceMap& ref, double standoff) {
    std::istringstream is(text);
    std::string tag;
    std::size_t n_clusters = 0;
    is >> tag >> n_clusters;
    if (tag != "plan" || !is) throw std::invalid_argument("malformed plan header");

    InspectionPlan plan;
    for (std::size_t k = 0; k < n_clusters; ++k) {
        Cluster cluster;
        std::size_t count = 0;
        is >> tag >> cluster.id >> cluster.source_segment >> count;
        if (tag != "cluster" || !is) throw std::invalid_argument("malformed cluster header");
        for (std::size_t i = 0; i < count; ++i) {
            Viewpoint vp;
            is >> vp.position.x >> vp.position.y >> vp.yaw >> vp.source_segment;
            if (!is) throw std::invalid_argument("malformed viewpoint row");
            vp.surface_index = static_cast<int>(i);
            const RaycastHit hit =
                raycast(ref.as_grid(), vp.position, vp.yaw, standoff + 1.0);
            vp.surface_point = hit.cell ? ref.spec().center_of(*hit.cell)
                                        : vp.position + unit_vector(vp.yaw) * standoff;
            const int idx = static_cast<int>(plan.viewpoints.size());
            plan.viewpoints.push_back(vp);
            cluster.viewpoints.push_back(idx);
        }
        plan.entry_viewpoint.push_back(cluster.viewpoints.front());
        for (int v : cluster.viewpoints) plan.flat_order.push_back(v);
        plan.clusters.push_back(std::move(cluster));
    }
    return plan;
}

}  // namespace asip
