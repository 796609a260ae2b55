#include "asip/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

#include "asip/distance_field.hpp"
#include "asip/errors.hpp"
#include "asip/rng.hpp"
#include "asip/view_angle.hpp"

namespace asip {

using json = nlohmann::ordered_json;

const char* shape_kind_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Line: return "line";
        case ShapeKind::LShape: return "l_shape";
        case ShapeKind::TShape: return "t_shape";
        case ShapeKind::Cross: return "cross";
        case ShapeKind::Arc: return "arc";
        case ShapeKind::Circle: return "circle";
    }
    return "line";
}

ShapeKind shape_kind_from_name(const std::string& name) {
    if (name == "line") return ShapeKind::Line;
    if (name == "l_shape") return ShapeKind::LShape;
    if (name == "t_shape") return ShapeKind::TShape;
    if (name == "cross") return ShapeKind::Cross;
    if (name == "arc") return ShapeKind::Arc;
    if (name == "circle") return ShapeKind::Circle;
    throw std::invalid_argument("unknown shape kind: " + name);
}

namespace {

struct SegmentPrim {
    Vec2 a, b;
};
struct ArcPrim {
    double radius;
    double sweep;
};

// Skeleton of a component in its local frame.
void shape_skeleton(const ComponentShape& shape, std::vector<SegmentPrim>& segments,
                    std::vector<ArcPrim>& arcs, double& solid_radius) {
    segments.clear();
    arcs.clear();
    solid_radius = 0.0;
    const auto& s = shape.size;
    switch (shape.kind) {
        case ShapeKind::Line:
            segments.push_back({{-0.5 * s[0], 0.0}, {0.5 * s[0], 0.0}});
            break;
        case ShapeKind::LShape:
            segments.push_back({{0.0, 0.0}, {s[0], 0.0}});
            segments.push_back({{0.0, 0.0}, {0.0, s[1]}});
            break;
        case ShapeKind::TShape:
            segments.push_back({{-0.5 * s[0], 0.0}, {0.5 * s[0], 0.0}});
            segments.push_back({{0.0, 0.0}, {0.0, -s[1]}});
            break;
        case ShapeKind::Cross:
            segments.push_back({{-0.5 * s[0], 0.0}, {0.5 * s[0], 0.0}});
            segments.push_back({{0.0, -0.5 * s[1]}, {0.0, 0.5 * s[1]}});
            break;
        case ShapeKind::Arc:
            arcs.push_back({s[0], s[1]});
            break;
        case ShapeKind::Circle:
            solid_radius = s[0];
            break;
    }
}

double arc_distance(const Vec2& p, const ArcPrim& arc) {
    double theta = std::atan2(p.y, p.x);
    if (theta < 0.0) theta += kTwoPi;
    if (theta <= arc.sweep) return std::abs(p.norm() - arc.radius);
    const Vec2 e0{arc.radius, 0.0};
    const Vec2 e1 = unit_vector(arc.sweep) * arc.radius;
    return std::min((p - e0).norm(), (p - e1).norm());
}

// Rasterizes the component into cell indices at the given spec.
std::vector<int> rasterize_component(const ComponentShape& shape, const GridSpec& spec,
                                     double thickness) {
    std::vector<SegmentPrim> segments;
    std::vector<ArcPrim> arcs;
    double solid_radius = 0.0;
    shape_skeleton(shape, segments, arcs, solid_radius);

    // Conservative bounding radius around the component pose.
    double reach = solid_radius;
    for (const auto& seg : segments) reach = std::max({reach, seg.a.norm(), seg.b.norm()});
    for (const auto& arc : arcs) reach = std::max(reach, arc.radius);
    reach += 0.5 * thickness + spec.resolution;

    const int x0 = std::max(0, static_cast<int>((shape.position.x - reach - spec.origin.x) / spec.resolution));
    const int x1 = std::min(spec.width - 1,
                            static_cast<int>((shape.position.x + reach - spec.origin.x) / spec.resolution));
    const int y0 = std::max(0, static_cast<int>((shape.position.y - reach - spec.origin.y) / spec.resolution));
    const int y1 = std::min(spec.height - 1,
                            static_cast<int>((shape.position.y + reach - spec.origin.y) / spec.resolution));

    std::vector<int> cells;
    const double half = 0.5 * thickness;
    for (int iy = y0; iy <= y1; ++iy) {
        for (int ix = x0; ix <= x1; ++ix) {
            const int c = spec.index(ix, iy);
            const Vec2 local = (spec.center_of(c) - shape.position).rotated(-shape.rotation);
            bool inside = false;
            if (solid_radius > 0.0) {
                inside = local.norm() <= solid_radius;
            } else {
                for (const auto& seg : segments) {
                    if (point_segment_distance(local, seg.a, seg.b) <= half) {
                        inside = true;
                        break;
                    }
                }
                for (const auto& arc : arcs) {
                    if (inside) break;
                    inside = arc_distance(local, arc) <= half;
                }
            }
            if (inside) cells.push_back(c);
        }
    }
    return cells;
}

std::vector<int> rasterize_obstacle(const Obstacle& ob, const GridSpec& spec) {
    std::vector<int> cells;
    const double rx = ob.disc ? 0.5 * ob.size_a : 0.5 * ob.size_a;
    const double ry = ob.disc ? 0.5 * ob.size_a : 0.5 * ob.size_b;
    const int x0 = std::max(0, static_cast<int>((ob.position.x - rx - spec.origin.x) / spec.resolution) - 1);
    const int x1 = std::min(spec.width - 1,
                            static_cast<int>((ob.position.x + rx - spec.origin.x) / spec.resolution) + 1);
    const int y0 = std::max(0, static_cast<int>((ob.position.y - ry - spec.origin.y) / spec.resolution) - 1);
    const int y1 = std::min(spec.height - 1,
                            static_cast<int>((ob.position.y + ry - spec.origin.y) / spec.resolution) + 1);
    for (int iy = y0; iy <= y1; ++iy) {
        for (int ix = x0; ix <= x1; ++ix) {
            const int c = spec.index(ix, iy);
            const Vec2 d = spec.center_of(c) - ob.position;
            const bool inside = ob.disc ? d.norm() <= 0.5 * ob.size_a
                                        : std::abs(d.x) <= rx && std::abs(d.y) <= ry;
            if (inside) cells.push_back(c);
        }
    }
    return cells;
}

// Free cells (mask == 0) reachable 4-connected from the start cell must cover
// every free cell.
bool free_space_connected(const GridSpec& spec, const std::vector<std::uint8_t>& mask,
                          int start_cell) {
    if (start_cell < 0 || mask[static_cast<std::size_t>(start_cell)]) return false;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(spec.size()), 0);
    std::deque<int> queue{start_cell};
    seen[static_cast<std::size_t>(start_cell)] = 1;
    int reached = 1;
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        const int cx = spec.cell_x(c), cy = spec.cell_y(c);
        constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& o : off) {
            const int nx = cx + o[0], ny = cy + o[1];
            if (!spec.in_bounds(nx, ny)) continue;
            const int n = spec.index(nx, ny);
            if (mask[static_cast<std::size_t>(n)] || seen[static_cast<std::size_t>(n)]) continue;
            seen[static_cast<std::size_t>(n)] = 1;
            ++reached;
            queue.push_back(n);
        }
    }
    int total_free = 0;
    for (auto m : mask)
        if (!m) ++total_free;
    return reached == total_free;
}

std::vector<ShapeKind> kinds_for_config(int config_id) {
    switch (config_id) {
        case 1: return {ShapeKind::Line, ShapeKind::LShape};
        case 2: return {ShapeKind::Line, ShapeKind::LShape, ShapeKind::TShape};
        case 3: return {ShapeKind::Line, ShapeKind::LShape, ShapeKind::TShape, ShapeKind::Cross};
        case 4:
            return {ShapeKind::Line, ShapeKind::LShape, ShapeKind::TShape, ShapeKind::Cross,
                    ShapeKind::Arc};
        case 5:
            return {ShapeKind::Line, ShapeKind::LShape, ShapeKind::TShape, ShapeKind::Cross,
                    ShapeKind::Arc, ShapeKind::Circle};
        default: throw std::invalid_argument("config_id must be in 1..5");
    }
}

ComponentShape sample_component(Rng& rng, const std::vector<ShapeKind>& kinds) {
    ComponentShape shape;
    shape.kind = kinds[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kinds.size()) - 1))];
    switch (shape.kind) {
        case ShapeKind::Line: shape.size = {rng.uniform(1.5, 3.0)}; break;
        case ShapeKind::LShape: shape.size = {rng.uniform(1.2, 2.2), rng.uniform(1.2, 2.2)}; break;
        case ShapeKind::TShape: shape.size = {rng.uniform(1.2, 2.2), rng.uniform(1.0, 2.0)}; break;
        case ShapeKind::Cross: shape.size = {rng.uniform(1.2, 2.2), rng.uniform(1.2, 2.2)}; break;
        case ShapeKind::Arc:
            shape.size = {rng.uniform(0.8, 1.8), rng.uniform(0.5 * kPi, 1.4 * kPi)};
            break;
        case ShapeKind::Circle: shape.size = {rng.uniform(0.5, 1.2)}; break;
    }
    shape.rotation = rng.uniform(0.0, kTwoPi);
    return shape;
}

}  // namespace

Scene generate_scene(const ScenarioConfig& config, const SceneConventions& conv) {
    if (config.config_id < 1 || config.config_id > 5)
        throw std::invalid_argument("config_id must be in 1..5");
    if (config.boundary_width <= 0.0 || config.boundary_height <= 0.0)
        throw std::invalid_argument("boundary must be positive");

    const double res = conv.resolution;
    GridSpec spec;
    spec.resolution = res;
    spec.width = static_cast<int>(std::lround(config.boundary_width / res));
    spec.height = static_cast<int>(std::lround(config.boundary_height / res));
    spec.origin = {0.0, 0.0};

    Rng rng(config.seed ^ (static_cast<std::uint64_t>(config.config_id) * 0x9e3779b97f4a7c15ULL));

    Scene scene;
    scene.config = config;
    scene.start.position = spec.origin + conv.start_offset;
    scene.start.yaw = 0.0;
    const int start_cell = spec.cell_of(scene.start.position);

    // Enclosing boundary: the outermost cell ring.
    std::vector<std::uint8_t> structure(static_cast<std::size_t>(spec.size()), 0);
    for (int iy = 0; iy < spec.height; ++iy)
        for (int ix = 0; ix < spec.width; ++ix)
            if (ix == 0 || iy == 0 || ix == spec.width - 1 || iy == spec.height - 1)
                structure[static_cast<std::size_t>(spec.index(ix, iy))] = 1;

    const auto kinds = kinds_for_config(config.config_id);
    const int component_count =
        config.component_count >= 0 ? config.component_count : rng.uniform_int(10, 15);

    DistanceField structure_field(spec, structure);
    for (int placed = 0; placed < component_count; ++placed) {
        bool success = false;
        for (int attempt = 0; attempt < conv.placement_attempts; ++attempt) {
            ComponentShape shape = sample_component(rng, kinds);
            shape.position = {rng.uniform(0.0, config.boundary_width),
                              rng.uniform(0.0, config.boundary_height)};
            if ((shape.position - scene.start.position).norm() <
                conv.start_clearance + conv.component_separation)
                continue;

            const auto cells = rasterize_component(shape, spec, conv.stroke_thickness);
            if (cells.empty()) continue;
            bool ok = true;
            for (int c : cells) {
                if (structure_field.at_cell(c) < conv.component_separation ||
                    (spec.center_of(c) - scene.start.position).norm() < conv.start_clearance) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;

            auto candidate = structure;
            for (int c : cells) candidate[static_cast<std::size_t>(c)] = 1;
            if (!free_space_connected(spec, candidate, start_cell)) continue;

            structure = std::move(candidate);
            structure_field = DistanceField(spec, structure);
            scene.components.push_back(shape);
            success = true;
            break;
        }
        if (!success) throw InfeasibleError("placement infeasible");
    }

    scene.reference = ReferenceMap::build(spec, structure, scene.start.position);

    // Truth: reference structure plus obstacles unknown to the reference.
    auto truth_mask = structure;
    const DistanceField ref_field(spec, structure);
    for (int placed = 0; placed < config.obstacle_count; ++placed) {
        bool success = false;
        for (int attempt = 0; attempt < conv.placement_attempts; ++attempt) {
            Obstacle ob;
            ob.disc = rng.uniform() < 0.5;
            ob.size_a = rng.uniform(config.obstacle_size_min, config.obstacle_size_max);
            ob.size_b = rng.uniform(config.obstacle_size_min, config.obstacle_size_max);
            ob.position = {rng.uniform(0.0, config.boundary_width),
                           rng.uniform(0.0, config.boundary_height)};
            if ((ob.position - scene.start.position).norm() < conv.start_clearance) continue;

            const auto cells = rasterize_obstacle(ob, spec);
            if (cells.empty()) continue;
            const DistanceField truth_field(spec, truth_mask);
            bool ok = true;
            for (int c : cells) {
                if (ref_field.at_cell(c) < conv.obstacle_gap ||
                    truth_field.at_cell(c) < conv.obstacle_gap ||
                    (spec.center_of(c) - scene.start.position).norm() < conv.start_clearance) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;

            auto candidate = truth_mask;
            for (int c : cells) candidate[static_cast<std::size_t>(c)] = 1;
            if (!free_space_connected(spec, candidate, start_cell)) continue;

            truth_mask = std::move(candidate);
            scene.obstacles.push_back(ob);
            success = true;
            break;
        }
        if (!success) throw InfeasibleError("placement infeasible");
    }

    scene.truth = OccupancyGrid(spec, Occ::Free);
    for (int c = 0; c < spec.size(); ++c)
        if (truth_mask[static_cast<std::size_t>(c)]) scene.truth.mark_occupied(c);
    return scene;
}

Scene generate_occlusion_scenario(std::uint64_t seed, const ScenarioConfig& base,
                                  const GlobalPlannerParams& planner_params,
                                  const SensorModel& camera, InspectionPlan& plan_out,
                                  const SceneConventions& conv) {
    // The component layout is fixed by the base config; only obstacles are
    // resampled until one creates a partial occlusion.
    ScenarioConfig layout = base;
    layout.obstacle_count = 0;
    const Scene base_scene = generate_scene(layout, conv);
    plan_out = plan_global(base_scene.reference, planner_params, camera, base_scene.start.position);
    if (plan_out.empty()) throw InfeasibleError("occlusion scenario needs a non-empty plan");

    const int obstacle_count = std::max(base.obstacle_count, 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
        ScenarioConfig candidate = base;
        candidate.obstacle_count = obstacle_count;
        candidate.seed = base.seed;  // keep the same component layout
        // Re-generate with a distinct obstacle stream per attempt.
        Scene scene = generate_scene(layout, conv);
        Rng ob_rng(seed ^ (0xa24baed4963ee407ULL + static_cast<std::uint64_t>(attempt)));

        auto truth_mask = std::vector<std::uint8_t>(
            static_cast<std::size_t>(scene.reference.spec().size()), 0);
        const GridSpec& spec = scene.reference.spec();
        for (int c = 0; c < spec.size(); ++c)
            truth_mask[static_cast<std::size_t>(c)] = scene.reference.is_structure(c) ? 1 : 0;
        const DistanceField ref_field(spec, truth_mask);
        const int start_cell = spec.cell_of(scene.start.position);

        bool placed_all = true;
        for (int k = 0; k < obstacle_count && placed_all; ++k) {
            bool success = false;
            for (int t = 0; t < conv.placement_attempts; ++t) {
                Obstacle ob;
                ob.disc = ob_rng.uniform() < 0.5;
                ob.size_a = ob_rng.uniform(base.obstacle_size_min, base.obstacle_size_max);
                ob.size_b = ob_rng.uniform(base.obstacle_size_min, base.obstacle_size_max);
                ob.position = {ob_rng.uniform(0.0, base.boundary_width),
                               ob_rng.uniform(0.0, base.boundary_height)};
                if ((ob.position - scene.start.position).norm() < conv.start_clearance) continue;
                const auto cells = rasterize_obstacle(ob, spec);
                if (cells.empty()) continue;
                const DistanceField truth_field(spec, truth_mask);
                bool ok = true;
                for (int c : cells) {
                    if (ref_field.at_cell(c) < conv.obstacle_gap ||
                        truth_field.at_cell(c) < conv.obstacle_gap ||
                        (spec.center_of(c) - scene.start.position).norm() < conv.start_clearance) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                auto cand = truth_mask;
                for (int c : cells) cand[static_cast<std::size_t>(c)] = 1;
                if (!free_space_connected(spec, cand, start_cell)) continue;
                truth_mask = std::move(cand);
                scene.obstacles.push_back(ob);
                success = true;
                break;
            }
            placed_all = success;
        }
        if (!placed_all) continue;

        scene.truth = OccupancyGrid(spec, Occ::Free);
        for (int c = 0; c < spec.size(); ++c)
            if (truth_mask[static_cast<std::size_t>(c)]) scene.truth.mark_occupied(c);

        // Project obstacles onto the targets under the nominal viewing
        // direction: cells occluded in truth that the plan expected to see.
        std::set<int> occluded, footprint;
        for (const Viewpoint& vp : plan_out.viewpoints) {
            const auto occ = get_occluded_regions(vp, camera, scene.reference, scene.truth);
            if (occ.empty()) continue;
            occluded.insert(occ.begin(), occ.end());
            const auto fp = nominal_footprint(vp, camera, scene.reference);
            footprint.insert(fp.begin(), fp.end());
        }
        if (occluded.empty()) continue;                     // occludes nothing: excluded
        if (occluded.size() >= footprint.size()) continue;  // total occlusion: excluded

        scene.occluded_cells.assign(occluded.begin(), occluded.end());
        scene.config = base;
        scene.config.obstacle_count = obstacle_count;
        return scene;
    }
    throw InfeasibleError("occlusion scenario resampling budget exhausted");
}

std::string scene_meta_json(const Scene& scene) {
    json j;
    j["config_id"] = scene.config.config_id;
    j["seed"] = scene.config.seed;
    j["boundary"] = {scene.config.boundary_width, scene.config.boundary_height};
    j["start"] = {scene.start.position.x, scene.start.position.y, scene.start.yaw};
    j["components"] = json::array();
    for (const auto& c : scene.components) {
        json jc;
        jc["kind"] = shape_kind_name(c.kind);
        jc["size"] = c.size;
        jc["position"] = {c.position.x, c.position.y};
        jc["rotation"] = c.rotation;
        j["components"].push_back(jc);
    }
    j["obstacles"] = json::array();
    for (const auto& o : scene.obstacles) {
        json jo;
        jo["disc"] = o.disc;
        jo["position"] = {o.position.x, o.position.y};
        jo["size"] = {o.size_a, o.size_b};
        j["obstacles"].push_back(jo);
    }
    j["occluded_cells"] = scene.occluded_cells;
    return j.dump(2) + "\n";
}

Scene load_scene(const std::string& reference_text, const std::string& truth_text,
                 const std::string& meta_json) {
    const json j = json::parse(meta_json);
    Scene scene;
    scene.config.config_id = j.at("config_id").get<int>();
    scene.config.seed = j.at("seed").get<std::uint64_t>();
    scene.config.boundary_width = j.at("boundary")[0].get<double>();
    scene.config.boundary_height = j.at("boundary")[1].get<double>();
    scene.start.position = {j.at("start")[0].get<double>(), j.at("start")[1].get<double>()};
    scene.start.yaw = j.at("start")[2].get<double>();
    for (const auto& jc : j.at("components")) {
        ComponentShape c;
        c.kind = shape_kind_from_name(jc.at("kind").get<std::string>());
        c.size = jc.at("size").get<std::vector<double>>();
        c.position = {jc.at("position")[0].get<double>(), jc.at("position")[1].get<double>()};
        c.rotation = jc.at("rotation").get<double>();
        scene.components.push_back(c);
    }
    for (const auto& jo : j.at("obstacles")) {
        Obstacle o;
        o.disc = jo.at("disc").get<bool>();
        o.position = {jo.at("position")[0].get<double>(), jo.at("position")[1].get<double>()};
        o.size_a = jo.at("size")[0].get<double>();
        o.size_b = jo.at("size")[1].get<double>();
        scene.obstacles.push_back(o);
    }
    scene.occluded_cells = j.at("occluded_cells").get<std::vector<int>>();
    scene.config.obstacle_count = static_cast<int>(scene.obstacles.size());
    scene.reference = parse_reference(reference_text, scene.start.position);
    scene.truth = parse_grid(truth_text);
    return scene;
}

}  // namespace asip
