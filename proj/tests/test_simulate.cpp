#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kitecert/simulate.hpp"

using namespace kitecert;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class ConstantController final : public Controller {
public:
    explicit ConstantController(double u) : u_(u) {}
    double compute(const std::array<double, 5>&, double) override { return u_; }
    std::string id() const override { return "const"; }

private:
    double u_;
};

// Small deterministic feedback so closed-loop trajectories react to the state.
class ProportionalController final : public Controller {
public:
    double compute(const std::array<double, 5>& x_hat, double) override {
        return std::clamp(-4.0 * x_hat[2] - 2.0 * x_hat[1], -10.0, 10.0);
    }
    std::string id() const override { return "prop"; }
};

Scenario quiet_scenario(const SimConfig& cfg) {
    Scenario sc;
    sc.master_seed = 0;
    sc.index = 0;
    sc.x0 = KiteState{29 * kDeg, 2 * kDeg, 1 * kDeg};
    sc.e0 = 5.0;
    sc.v_m = 8.0;
    sc.p_v0 = 0.0;
    sc.w_tb.assign(cfg.n_sim, 0.0);
    sc.meas_noise.assign(cfg.ekf_steps_total(), {0.0, 0.0, 0.0});
    return sc;
}

bool same_record(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.states.size() != b.states.size() || a.inputs.size() != b.inputs.size())
        return false;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        for (int i = 0; i < 3; ++i)
            if (a.states[k][i] != b.states[k][i]) return false;
    for (std::size_t k = 0; k < a.inputs.size(); ++k)
        if (a.inputs[k] != b.inputs[k] || a.thrust_n[k] != b.thrust_n[k]) return false;
    return true;
}

}  // namespace

TEST_CASE("constant input, zero noise: closed loop equals open-loop integration") {
    SimConfig cfg;
    cfg.n_sim = 40;
    const KiteParams kp;
    WindParams wp;

    Scenario sc = quiet_scenario(cfg);
    ConstantController ctrl(0.0);
    const auto rec = simulate_closed_loop(sc, ctrl, nullptr, cfg, kp, wp);
    REQUIRE(rec.complete());

    // Manual open-loop RK4 of the joint angle + turbulence system.
    wp.v_m = sc.v_m;
    std::array<double, 4> x{sc.x0.theta, sc.x0.phi, sc.x0.psi, 0.0};
    const int substeps = static_cast<int>(std::llround(cfg.t_c / cfg.substep));
    for (int k = 0; k < cfg.n_sim; ++k) {
        for (int s = 0; s < substeps; ++s) {
            x = rk4_step<4>(x, cfg.substep, [&](const std::array<double, 4>& v) {
                const auto d =
                    kite_rhs(KiteState{v[0], v[1], v[2]}, 0.0, wind_speed(v[3], wp),
                             sc.e0, kp);
                return std::array<double, 4>{d[0], d[1], d[2], -v[3] / wp.tau_f()};
            });
        }
    }
    for (int i = 0; i < 3; ++i)
        CHECK(rec.states.back()[i] == doctest::Approx(x[i]).epsilon(1e-13));
}

TEST_CASE("identical scenario, controller and config give bit-identical records") {
    SimConfig cfg;
    cfg.n_sim = 25;
    const KiteParams kp;
    const WindParams wp;
    Scenario sc = quiet_scenario(cfg);
    for (int k = 0; k < cfg.n_sim; ++k) sc.w_tb[k] = 0.2 * std::sin(0.3 * k);
    for (int j = 0; j < cfg.ekf_steps_total(); ++j)
        sc.meas_noise[j] = {1e-3 * std::sin(j), -1e-3 * std::cos(j), 2e-3};

    ProportionalController c1, c2;
    const auto a = simulate_closed_loop(sc, c1, nullptr, cfg, kp, wp);
    const auto b = simulate_closed_loop(sc, c2, nullptr, cfg, kp, wp);
    CHECK(same_record(a, b));
}

TEST_CASE("input delay changes the trajectory after the first control update") {
    SimConfig cfg;
    cfg.n_sim = 30;
    SimConfig delayed = cfg;
    delayed.input_delay = 0.065;
    const KiteParams kp;
    const WindParams wp;
    const Scenario sc = quiet_scenario(cfg);

    ProportionalController c1, c2;
    const auto plain = simulate_closed_loop(sc, c1, nullptr, cfg, kp, wp);
    const auto lag = simulate_closed_loop(sc, c2, nullptr, delayed, kp, wp);
    REQUIRE(plain.complete());
    REQUIRE(lag.complete());

    CHECK(plain.states[0] == lag.states[0]);
    double diff1 = 0.0, diff_end = 0.0;
    for (int i = 0; i < 3; ++i) {
        diff1 = std::max(diff1, std::abs(plain.states[1][i] - lag.states[1][i]));
        diff_end =
            std::max(diff_end, std::abs(plain.states.back()[i] - lag.states.back()[i]));
    }
    CHECK(diff1 > 1e-9);
    CHECK(diff_end > 1e-6);
}

TEST_CASE("orientation equilibrium is preserved under frozen wind") {
    SimConfig cfg;
    cfg.n_sim = 60;
    const KiteParams kp;
    const WindParams wp;
    Scenario sc = quiet_scenario(cfg);
    // cos(psi) = tan(theta)/E at psi = 0: theta and phi stay frozen.
    sc.x0 = KiteState{std::atan(5.0), 0.0, 0.0};

    ConstantController ctrl(0.0);
    const auto rec = simulate_closed_loop(sc, ctrl, nullptr, cfg, kp, wp);
    REQUIRE(rec.complete());
    CHECK(std::abs(rec.states.back()[0] - sc.x0.theta) < 1e-10);
    CHECK(std::abs(rec.states.back()[1]) < 1e-10);
}

TEST_CASE("domain fault marks the record instead of throwing") {
    SimConfig cfg;
    cfg.n_sim = 10;
    const KiteParams kp;
    const WindParams wp;
    Scenario sc = quiet_scenario(cfg);
    sc.e0 = 0.5;  // glide ratio goes negative at full deflection

    ConstantController ctrl(10.0);
    const auto rec = simulate_closed_loop(sc, ctrl, nullptr, cfg, kp, wp);
    CHECK(rec.faulted);
    CHECK(rec.fault_step == 0);
    CHECK_FALSE(rec.complete());
    CHECK(rec.states.size() >= 1);
    CHECK(rec.inputs.size() == 1);
}

TEST_CASE("record layout: aligned sequences and cached columns") {
    SimConfig cfg;
    cfg.n_sim = 12;
    const KiteParams kp;
    const WindParams wp;
    const Scenario sc = quiet_scenario(cfg);
    ConstantController ctrl(1.5);
    const auto rec = simulate_closed_loop(sc, ctrl, nullptr, cfg, kp, wp);
    REQUIRE(rec.complete());
    CHECK(rec.states.size() == static_cast<std::size_t>(cfg.n_sim + 1));
    CHECK(rec.estimates.size() == rec.states.size());
    CHECK(rec.wind_speed.size() == rec.states.size());
    CHECK(rec.height_m.size() == rec.states.size());
    CHECK(rec.inputs.size() == static_cast<std::size_t>(cfg.n_sim));
    CHECK(rec.thrust_n.size() == rec.inputs.size());
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
        const KiteState x{rec.states[k][0], rec.states[k][1], rec.states[k][2]};
        CHECK(rec.height_m[k] == height(x, kp));
    }
    for (std::size_t k = 0; k < rec.inputs.size(); ++k) {
        const KiteState x{rec.states[k][0], rec.states[k][1], rec.states[k][2]};
        CHECK(rec.thrust_n[k] == thrust(x, rec.wind_speed[k], rec.inputs[k], sc.e0, kp));
    }
}

TEST_CASE("state feedback mode reports the true augmented state to the controller") {
    SimConfig cfg;
    cfg.n_sim = 5;
    const KiteParams kp;
    const WindParams wp;
    const Scenario sc = quiet_scenario(cfg);
    ConstantController ctrl(0.5);
    const auto rec = simulate_closed_loop(sc, ctrl, nullptr, cfg, kp, wp);
    for (std::size_t k = 0; k + 1 < rec.states.size(); ++k) {
        for (int i = 0; i < 3; ++i) CHECK(rec.estimates[k][i] == rec.states[k][i]);
        CHECK(rec.estimates[k][3] == sc.e0);
        CHECK(rec.estimates[k][4] == rec.wind_speed[k]);
    }
}

TEST_CASE("integration order: halving the substep converges at fourth order") {
    // Fixed input, smooth segment, error measured against a much finer run.
    const KiteParams kp;
    WindParams wp;
    wp.v_m = 8.0;
    const double u = 2.0, e0 = 5.0, T = 5.0;

    auto integrate = [&](double h) {
        std::array<double, 4> x{35 * kDeg, 5 * kDeg, 0.2, 0.4};
        const int n = static_cast<int>(std::llround(T / h));
        for (int i = 0; i < n; ++i) {
            x = rk4_step<4>(x, h, [&](const std::array<double, 4>& v) {
                const auto d = kite_rhs(KiteState{v[0], v[1], v[2]}, u,
                                        wind_speed(v[3], wp), e0, kp);
                return std::array<double, 4>{d[0], d[1], d[2], -v[3] / wp.tau_f() + 0.1};
            });
        }
        return x;
    };

    const auto ref = integrate(0.05 / 64.0);
    auto err = [&](const std::array<double, 4>& x) {
        double e = 0.0;
        for (int i = 0; i < 4; ++i) e = std::max(e, std::abs(x[i] - ref[i]));
        return e;
    };
    const double e1 = err(integrate(0.05));
    const double e2 = err(integrate(0.025));
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
}
