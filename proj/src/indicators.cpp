#include "kitecert/indicators.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace kitecert {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Number of control steps with a recorded successor state.
std::size_t step_count(const TrajectoryRecord& traj) {
    return traj.inputs.size();
}
}  // namespace

IndicatorKind indicator_kind_from_string(const std::string& s) {
    if (s == "max_violation") return IndicatorKind::max_violation;
    if (s == "avg_violation") return IndicatorKind::avg_violation;
    if (s == "avg_cost") return IndicatorKind::avg_cost;
    if (s == "height_margin") return IndicatorKind::height_margin;
    if (s == "neg_avg_thrust") return IndicatorKind::neg_avg_thrust;
    if (s == "binary_admissible") return IndicatorKind::binary_admissible;
    throw std::invalid_argument("unknown indicator kind: " + s);
}

std::string to_string(IndicatorKind k) {
    switch (k) {
        case IndicatorKind::max_violation: return "max_violation";
        case IndicatorKind::avg_violation: return "avg_violation";
        case IndicatorKind::avg_cost: return "avg_cost";
        case IndicatorKind::height_margin: return "height_margin";
        case IndicatorKind::neg_avg_thrust: return "neg_avg_thrust";
        case IndicatorKind::binary_admissible: return "binary_admissible";
    }
    return "?";
}

double max_violation(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    if (traj.faulted) return kInf;
    double worst = -kInf;
    for (std::size_t k = 0; k < step_count(traj); ++k)
        worst = std::max(worst, spec.h_min - traj.height_m[k]);
    return worst;
}

double avg_violation(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    if (traj.faulted) return kInf;
    const std::size_t n = step_count(traj);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        sum += std::max(0.0, spec.h_min - traj.height_m[k]);
    return sum / static_cast<double>(n);
}

double avg_cost(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    if (traj.faulted) return kInf;
    const std::size_t n = step_count(traj);
    double sum = 0.0;
    double u_prev = traj.u_prev0;
    for (std::size_t k = 0; k < n; ++k) {
        const double du = traj.inputs[k] - u_prev;
        sum += -spec.w_f * traj.thrust_n[k] + spec.w_u * du * du;
        u_prev = traj.inputs[k];
    }
    return sum / static_cast<double>(n);
}

double height_margin(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    if (traj.faulted) return kInf;
    double worst = -kInf;
    for (double h : traj.height_m) worst = std::max(worst, spec.h_min - h);
    return worst;
}

double neg_avg_thrust(const TrajectoryRecord& traj) {
    if (traj.faulted) return kInf;
    const std::size_t n = step_count(traj);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum -= traj.thrust_n[k];
    return sum / static_cast<double>(n);
}

int binary_admissible(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    if (traj.faulted) return 1;
    return avg_violation(traj, spec) > 0.0 ? 1 : 0;
}

double evaluate_indicator(const TrajectoryRecord& traj, const IndicatorSpec& spec) {
    switch (spec.kind) {
        case IndicatorKind::max_violation: return max_violation(traj, spec);
        case IndicatorKind::avg_violation: return avg_violation(traj, spec);
        case IndicatorKind::avg_cost: return avg_cost(traj, spec);
        case IndicatorKind::height_margin: return height_margin(traj, spec);
        case IndicatorKind::neg_avg_thrust: return neg_avg_thrust(traj);
        case IndicatorKind::binary_admissible:
            return static_cast<double>(binary_admissible(traj, spec));
    }
    throw std::logic_error("evaluate_indicator: unknown kind");
}

}  // namespace kitecert
