#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kitecert/kite.hpp"
#include "kitecert/scenario.hpp"

namespace kitecert {

// Feedback law interface: maps the augmented estimate [theta, phi, psi, E0, v0]
// and the previously commanded input to the next input. Implementations own
// any warm-start state, so one instance serves exactly one closed loop at a
// time; reset() clears that state between scenarios.
class Controller {
public:
    virtual ~Controller() = default;
    virtual double compute(const std::array<double, 5>& x_hat_aug, double u_prev) = 0;
    virtual bool last_ok() const { return true; }
    virtual std::string id() const = 0;
    virtual void reset() {}
};

// Estimator interface: predicts over an interval with a constant applied
// input, corrects with a [theta, phi, v0] measurement.
class StateEstimator {
public:
    virtual ~StateEstimator() = default;
    virtual void init(const std::array<double, 5>& x_hat0) = 0;
    virtual void predict(double u, double dt) = 0;
    virtual void update(const std::array<double, 3>& y) = 0;
    virtual std::array<double, 5> estimate() const = 0;
};

// Complete closed-loop trace of one scenario under one controller. All
// sequences are aligned: states/estimates/wind_speed/height_m have one entry
// per control instant (n_sim+1 when the run completes), inputs/thrust_n/
// solver_ok one per control step. Heights and thrusts are redundant caches
// recomputable from states and parameters; persistence checks them on load.
struct TrajectoryRecord {
    std::string scenario_id;
    std::string controller_id;
    int n_sim = 0;
    double u_prev0 = 0.0;

    std::vector<std::array<double, 3>> states;
    std::vector<std::array<double, 5>> estimates;
    std::vector<double> inputs;
    std::vector<double> wind_speed;
    std::vector<double> thrust_n;
    std::vector<double> height_m;
    std::vector<std::uint8_t> solver_ok;

    bool faulted = false;
    int fault_step = -1;

    bool complete() const { return !faulted && static_cast<int>(inputs.size()) == n_sim; }
};

// Initial estimate: elementwise product of the true augmented state with the
// scenario's multiplicative deltas.
inline std::array<double, 5> multiplicative_init(const std::array<double, 5>& truth,
                                                 const std::array<double, 5>& deltas) {
    std::array<double, 5> out;
    for (int i = 0; i < 5; ++i) out[i] = truth[i] * deltas[i];
    return out;
}

// Simulates the closed loop: the plant (three kite angles plus the turbulence
// filter) is integrated with fixed-step RK4, the controller is queried every
// t_c with the current estimate, the estimator runs every t_ekf on noisy
// measurements. With input_delay > 0 the input commanded at t_k takes effect
// at t_k + delay, the previous input being held meanwhile.
//
// estimator == nullptr selects exact state feedback (the estimate equals the
// truth), which is how training data is generated.
//
// Domain faults (glide ratio <= 0, sin(theta) <= tol, non-finite state) stop
// the run and mark the record faulted; indicator evaluation treats faulted
// records as unbounded violations.
TrajectoryRecord simulate_closed_loop(const Scenario& scenario, Controller& controller,
                                      StateEstimator* estimator, const SimConfig& cfg,
                                      const KiteParams& kp, const WindParams& wind_base);

}  // namespace kitecert
