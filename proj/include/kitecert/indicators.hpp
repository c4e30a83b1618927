#pragma once

#include <string>

#include "kitecert/simulate.hpp"

namespace kitecert {

enum class IndicatorKind {
    max_violation,
    avg_violation,
    avg_cost,
    height_margin,
    neg_avg_thrust,
    binary_admissible,
};

IndicatorKind indicator_kind_from_string(const std::string& s);
std::string to_string(IndicatorKind k);

struct IndicatorSpec {
    IndicatorKind kind = IndicatorKind::height_margin;
    double h_min = 100.0;
    // Stage-cost weights, used by avg_cost only.
    double w_f = 1e-4;
    double w_u = 0.5;
};

// All indicators are deterministic functions of a recorded trajectory; they
// never re-simulate. Faulted records evaluate to +inf (binary_admissible: 1).
//
// Index ranges follow the defining expressions: the per-step indicators
// (max_violation, avg_violation, avg_cost, neg_avg_thrust) run over control
// steps k = 0..n_sim-1; height_margin scans every recorded state including
// the final one.

// Largest constraint value g = h_min - h over the per-step range.
double max_violation(const TrajectoryRecord& traj, const IndicatorSpec& spec);

// Mean positive part of g over steps (and the single constraint); zero iff
// the stepwise trajectory is admissible.
double avg_violation(const TrajectoryRecord& traj, const IndicatorSpec& spec);

// Mean stage cost -w_f * T_F(k) + w_u * (u(k) - u(k-1))^2.
double avg_cost(const TrajectoryRecord& traj, const IndicatorSpec& spec);

// Largest value of h_min - h over every recorded state; negative means the
// whole run kept a margin.
double height_margin(const TrajectoryRecord& traj, const IndicatorSpec& spec);

// Mean of -T_F(k); more thrust (better performance) is more negative.
double neg_avg_thrust(const TrajectoryRecord& traj);

// 0 iff avg_violation == 0.
int binary_admissible(const TrajectoryRecord& traj, const IndicatorSpec& spec);

double evaluate_indicator(const TrajectoryRecord& traj, const IndicatorSpec& spec);

}  // namespace kitecert
