#include "kitecert/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace kitecert {

namespace {

struct PlantState {
    KiteState kite;
    double p_v = 0.0;
};

// Joint RHS of the kite angles and the turbulence filter; u and w_tb are held
// constant over one integrator segment, v0 follows p_v within the step.
std::array<double, 4> plant_rhs(const std::array<double, 4>& x, double u, double w_tb,
                                double e0, const KiteParams& kp, const WindParams& wp) {
    const KiteState ks{x[0], x[1], x[2]};
    const double v0 = wind_speed(x[3], wp);
    const auto dk = kite_rhs(ks, u, v0, e0, kp);
    const double dpv = -x[3] / wp.tau_f() + w_tb;
    return {dk[0], dk[1], dk[2], dpv};
}

bool state_ok(const std::array<double, 4>& x, double u, double e0, const KiteParams& kp) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    if (std::sin(x[0]) <= kp.sin_theta_tol) return false;
    if (glide_ratio(e0, u, kp) <= 0.0) return false;
    return true;
}

}  // namespace

TrajectoryRecord simulate_closed_loop(const Scenario& scenario, Controller& controller,
                                      StateEstimator* estimator, const SimConfig& cfg,
                                      const KiteParams& kp, const WindParams& wind_base) {
    cfg.validate();
    kp.validate();

    WindParams wp = wind_base;
    wp.v_m = scenario.v_m;
    wp.validate();

    const int n_sim = cfg.n_sim;
    const int ekf_per_control = cfg.ekf_per_control();

    if (static_cast<int>(scenario.w_tb.size()) < n_sim)
        throw std::invalid_argument("simulate_closed_loop: w_tb sequence too short");
    if (estimator != nullptr &&
        static_cast<int>(scenario.meas_noise.size()) < n_sim * ekf_per_control)
        throw std::invalid_argument("simulate_closed_loop: measurement noise sequence too short");

    TrajectoryRecord rec;
    rec.scenario_id = scenario.id();
    rec.controller_id = controller.id();
    rec.n_sim = n_sim;
    rec.u_prev0 = scenario.u_prev0;
    rec.states.reserve(n_sim + 1);
    rec.estimates.reserve(n_sim + 1);
    rec.inputs.reserve(n_sim);
    rec.wind_speed.reserve(n_sim + 1);
    rec.thrust_n.reserve(n_sim);
    rec.height_m.reserve(n_sim + 1);
    rec.solver_ok.reserve(n_sim);

    std::array<double, 4> x{scenario.x0.theta, scenario.x0.phi, scenario.x0.psi,
                            scenario.p_v0};
    double v0 = wind_speed(x[3], wp);

    if (estimator != nullptr) {
        estimator->init(multiplicative_init({x[0], x[1], x[2], scenario.e0, v0},
                                            scenario.init_deltas));
    }

    auto truth_aug = [&]() -> std::array<double, 5> {
        return {x[0], x[1], x[2], scenario.e0, v0};
    };
    auto record_instant = [&]() {
        rec.states.push_back({x[0], x[1], x[2]});
        rec.wind_speed.push_back(v0);
        rec.height_m.push_back(height(KiteState{x[0], x[1], x[2]}, kp));
    };

    record_instant();

    double u_prev = scenario.u_prev0;
    int meas_index = 0;

    for (int k = 0; k < n_sim; ++k) {
        const auto x_hat = (estimator != nullptr) ? estimator->estimate() : truth_aug();
        rec.estimates.push_back(x_hat);

        const double u_cmd = controller.compute(x_hat, u_prev);
        rec.inputs.push_back(u_cmd);
        rec.solver_ok.push_back(controller.last_ok() ? 1 : 0);
        rec.thrust_n.push_back(
            thrust(KiteState{x[0], x[1], x[2]}, v0, u_cmd, scenario.e0, kp));

        const double w_tb = scenario.w_tb[k];
        bool fault = false;

        // Integrate one control period, estimator interval by interval. The
        // applied input switches from u_prev to u_cmd at `input_delay` into
        // the period; segments never straddle that switch.
        for (int j = 0; j < ekf_per_control && !fault; ++j) {
            const double a = j * cfg.t_ekf;
            const double b = a + cfg.t_ekf;
            double pos = a;
            while (pos < b - 1e-12 && !fault) {
                double seg_end = std::min(pos + cfg.substep, b);
                if (cfg.input_delay > pos + 1e-12 && cfg.input_delay < seg_end - 1e-12)
                    seg_end = cfg.input_delay;
                const double u_app = (pos + 1e-12 < cfg.input_delay) ? u_prev : u_cmd;
                const double dt = seg_end - pos;

                x = rk4_step<4>(x, dt, [&](const std::array<double, 4>& s) {
                    return plant_rhs(s, u_app, w_tb, scenario.e0, kp, wp);
                });
                if (estimator != nullptr) estimator->predict(u_app, dt);
                if (!state_ok(x, u_app, scenario.e0, kp)) fault = true;
                pos = seg_end;
            }
            v0 = wind_speed(x[3], wp);
            if (estimator != nullptr && !fault) {
                const auto& w = scenario.meas_noise[meas_index++];
                estimator->update({x[0] + w[0], x[1] + w[1], v0 + w[2]});
            }
        }

        if (fault) {
            rec.faulted = true;
            rec.fault_step = k;
            return rec;
        }

        record_instant();
        u_prev = u_cmd;
    }

    rec.estimates.push_back((estimator != nullptr) ? estimator->estimate() : truth_aug());
    return rec;
}

}  // namespace kitecert
