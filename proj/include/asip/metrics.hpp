#pragma once

#include <array>
#include <string>
#include <vector>

#include "asip/global_planner.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Per-instance evaluation quantities.
struct BenchmarkRecord {
    int config_id = 0;
    std::uint64_t seed = 0;
    double coverage_percent = 0.0;
    double trajectory_length = 0.0;   // executed
    double planned_length = 0.0;      // over the planned viewpoint sequence
    double mean_abs_dyaw = 0.0;       // over the planned viewpoint sequence
    double occluded_coverage = -1.0;  // occlusion suite only, else -1
    double planning_seconds = 0.0;    // wall clock, excluded from checksums
};

/// 100 * |covered| / |targets|; throws std::invalid_argument on an empty
/// target set.
double coverage_percent(const std::vector<int>& covered, const ReferenceMap& ref);

/// Sum of consecutive Euclidean distances over a pose log.
double trajectory_length(const std::vector<std::array<double, 4>>& log);

/// Mean wrapped |yaw difference| between consecutive yaw samples, in [0, pi].
double mean_abs_dyaw(const std::vector<double>& yaws);

/// Yaw sequence of a plan's flattened viewpoint order.
std::vector<double> plan_yaw_sequence(const InspectionPlan& plan);

/// |covered ∩ occluded| / |occluded|; throws on an empty occluded set.
double occluded_coverage_ratio(const std::vector<int>& covered,
                               const std::vector<int>& occluded);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    int count = 0;
};

/// Two-pass mean and sample standard deviation.
Aggregate aggregate(const std::vector<double>& values);

std::string format_mean_std(const Aggregate& a, int precision = 2);

}  // namespace asip
