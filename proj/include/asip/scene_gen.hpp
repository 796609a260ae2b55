#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asip/geometry.hpp"
#include "asip/global_planner.hpp"
#include "asip/grid_map.hpp"

namespace asip {

enum class ShapeKind { Line, LShape, TShape, Cross, Arc, Circle };

const char* shape_kind_name(ShapeKind kind);
ShapeKind shape_kind_from_name(const std::string& name);

/// One structural component: a stroked skeleton (or solid disc for circles)
/// placed at `position` with rotation `rotation`.
struct ComponentShape {
    ShapeKind kind = ShapeKind::Line;
    std::vector<double> size;  // lengths / radius / arc sweep, meters or radians
    Vec2 position;
    double rotation = 0.0;
};

struct Obstacle {
    bool disc = false;
    Vec2 position;
    double size_a = 0.5;  // rect width or disc diameter
    double size_b = 0.5;  // rect height (unused for discs)
};

struct ScenarioConfig {
    int config_id = 1;  // 1..5, selects the component-kind mixture
    std::uint64_t seed = 0;
    double boundary_width = 20.0;
    double boundary_height = 20.0;
    int component_count = -1;  // negative: draw from [10, 15]
    int obstacle_count = 0;
    double obstacle_size_min = 0.4;
    double obstacle_size_max = 1.5;
};

/// Conventions the benchmark protocol leaves open; all values are also
/// exposed through the defaults file.
struct SceneConventions {
    double resolution = 0.1;
    double stroke_thickness = 0.2;       // component wall thickness
    double component_separation = 2.0;   // min gap between components / walls
    double obstacle_gap = 0.3;           // min gap obstacle <-> structure
    double start_clearance = 1.0;        // keep-out radius around the start
    Vec2 start_offset{1.0, 1.0};         // start pose relative to the map origin
    int placement_attempts = 400;
};

struct Scene {
    ScenarioConfig config;
    ReferenceMap reference;
    OccupancyGrid truth;  // fully observed: reference structure + obstacles
    Pose start;
    std::vector<ComponentShape> components;
    std::vector<Obstacle> obstacles;
    std::vector<int> occluded_cells;  // occlusion scenarios only
};

/// Deterministic scene synthesis: enclosing boundary walls plus rejection-
/// sampled components (no two components touch, free space stays connected to
/// the start), then `obstacle_count` obstacles added to the truth grid only.
/// Throws InfeasibleError("placement infeasible") when the budget runs out.
Scene generate_scene(const ScenarioConfig& config, const SceneConventions& conventions = {});

/// Resamples obstacles until at least one partially occludes a target region
/// under the plan's nominal viewpoints: the projected occluded cell set must
/// be nonempty and a strict subset of the obstructed viewpoints' footprint.
/// The occluded set is stored on the returned scene; the nominal plan used
/// for the projection is returned through `plan_out`.
Scene generate_occlusion_scenario(std::uint64_t seed, const ScenarioConfig& base,
                                  const GlobalPlannerParams& planner_params,
                                  const SensorModel& camera, InspectionPlan& plan_out,
                                  const SceneConventions& conventions = {});

/// Sidecar metadata (config, seed, component and obstacle lists, start pose,
/// occluded cells) as a JSON document.
std::string scene_meta_json(const Scene& scene);
/// Rebuilds a Scene from the two grid files plus the metadata document.
Scene load_scene(const std::string& reference_text, const std::string& truth_text,
                 const std::string& meta_json);

}  // namespace asip
