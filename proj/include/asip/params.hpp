#pragma once

#include <map>
#include <string>

#include "asip/global_planner.hpp"
#include "asip/scene_gen.hpp"
#include "asip/simulator.hpp"

namespace asip {

/// Every constant the benchmark protocol leaves open, collected in one place
/// so the defaults file can expose and override all of them.
struct AsipParams {
    SceneConventions scene;
    GlobalPlannerParams planner;
    SimConfig sim;  // camera/lidar/view/mpc/spline settings live here
    int render_cell_pixels = 4;
};

/// Built-in defaults (the values in the checked-in defaults file).
AsipParams default_params();

/// Key-value text: one `key = value` per line, '#' comments. Unknown keys are
/// rejected so typos surface instead of silently using defaults.
void apply_params_text(AsipParams& params, const std::string& text);

/// Full defaults-file rendering of a parameter set.
std::string params_to_text(const AsipParams& params);

/// Defaults file resolution: explicit path > ASIP_DEFAULTS env var > builtin.
AsipParams load_params_with_defaults(const std::string& explicit_path = "");

}  // namespace asip
