#include "asip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace asip {

double coverage_percent(const std::vector<int>& covered, const ReferenceMap& ref) {
    if (ref.target_cells().empty()) throw std::invalid_argument("empty target set");
    return 100.0 * static_cast<double>(covered.size()) /
           static_cast<double>(ref.target_cells().size());
}

double trajectory_length(const std::vector<std::array<double, 4>>& log) {
    if (log.empty()) throw std::invalid_argument("empty trajectory log");
    double total = 0.0;
    for (std::size_t i = 1; i < log.size(); ++i)
        total += std::hypot(log[i][1] - log[i - 1][1], log[i][2] - log[i - 1][2]);
    return total;
}

double mean_abs_dyaw(const std::vector<double>& yaws) {
    if (yaws.size() < 2) throw std::invalid_argument("need at least two yaw samples");
    double total = 0.0;
    for (std::size_t i = 1; i < yaws.size(); ++i)
        total += angular_distance(yaws[i], yaws[i - 1]);
    return total / static_cast<double>(yaws.size() - 1);
}

std::vector<double> plan_yaw_sequence(const InspectionPlan& plan) {
    std::vector<double> yaws;
    yaws.reserve(plan.flat_order.size());
    for (int v : plan.flat_order) yaws.push_back(plan.viewpoints[static_cast<std::size_t>(v)].yaw);
    return yaws;
}

double occluded_coverage_ratio(const std::vector<int>& covered,
                               const std::vector<int>& occluded) {
    if (occluded.empty()) throw std::invalid_argument("empty occluded set");
    std::size_t hit = 0;
    for (int c : occluded)
        if (std::find(covered.begin(), covered.end(), c) != covered.end()) ++hit;
    return static_cast<double>(hit) / static_cast<double>(occluded.size());
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    a.count = static_cast<int>(values.size());
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return a;
}

std::string format_mean_std(const Aggregate& a, int precision) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << a.mean << "±" << a.stddev;
    return os.str();
}

}  // namespace asip
