#pragma once

#include "asip/global_planner.hpp"
#include "asip/grid_map.hpp"

namespace asip {

/// Comparator planner without segmentation: viewpoints sampled uniformly along
/// every connected surface run, sequenced by a position-only nearest-neighbor
/// tour, one cluster per viewpoint (no clustering, no local search).
InspectionPlan plan_naive(const ReferenceMap& ref, const GlobalPlannerParams& params,
                          const SensorModel& sensor, const Vec2& start);

}  // namespace asip
