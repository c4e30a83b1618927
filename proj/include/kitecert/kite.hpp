#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace kitecert {

// Physical and constraint parameters of the three-angle towing-kite model.
// tether_length and area are configuration, not benchmark constants. The
// defaults are chosen for internal consistency of the rest of the setup: with
// h_min = 100 m an initial elevation near 29 deg needs L_T >= ~217 m, while
// the 40-step/0.15 s lookahead only pays for entering a crosswind pattern
// when the entry turn (about pi at the peak turn rate v_a u / L_T) fits
// inside it, which bounds L_T from above near 250 m.
struct KiteParams {
    double c_tilde = 0.028;       // steering drag coefficient [-]
    double beta = 0.0;            // tether elevation [rad]
    double rho = 1.0;             // air density [kg/m^3]
    double h_min = 100.0;         // minimum height [m]
    double tether_length = 230.0; // L_T [m]
    double area = 450.0;          // kite area [m^2]
    double e0_nominal = 5.0;      // base glide ratio used where a point value is needed
    double sin_theta_tol = 1e-6;  // domain guard: 1/sin(theta) appears in the dynamics

    void validate() const;
};

// Kite attitude: zenith angle theta, azimuth phi, orientation psi [rad].
// theta must stay in (0, pi/2) for the model to be meaningful; psi is kept
// unwrapped.
struct KiteState {
    double theta = 0.0;
    double phi = 0.0;
    double psi = 0.0;
};

// Turbulent wind model parameters. v_m is the per-scenario mean wind speed.
struct WindParams {
    double k_sigma_v = 0.14;
    double l_v = 100.0;  // turbulence length scale [m]
    double t_v = 0.15;   // turbulence sampling period [s]
    double v_m = 8.0;    // mean wind speed [m/s]

    double sigma_v() const { return k_sigma_v * v_m; }
    double v_bar_n() const { return -sigma_v() / (2.0 * v_m); }
    double tau_f() const { return l_v / v_m; }
    double k_f() const { return std::sqrt(1.49 * tau_f() / t_v); }
    double c_v() const { return k_f() / tau_f(); }

    void validate() const;
};

// Turbulence state: first-order colored-noise filter state p_v driven by the
// piecewise-constant white noise sample w_tb.
struct WindState {
    double p_v = 0.0;
    double w_tb = 0.0;
};

// E = E_0 - c_tilde * u^2. Must stay positive for valid dynamics; callers
// check and record a fault instead of silently continuing.
double glide_ratio(double e0, double u, const KiteParams& p);

// Time derivative of the three kite angles for input u, wind speed v0 and
// base glide ratio e0. Raw formula: the caller is responsible for the domain
// guards (sin(theta) > tol, E > 0).
std::array<double, 3> kite_rhs(const KiteState& x, double u, double v0, double e0,
                               const KiteParams& p);

// Partial derivatives of kite_rhs, used by the estimator's covariance
// propagation and by the optimizer's adjoint sweep. Validated against finite
// differences in the tests.
struct KiteRhsJacobian {
    std::array<std::array<double, 3>, 3> d_dx;  // rows: d(theta',phi',psi') / d(theta,phi,psi)
    std::array<double, 3> d_du;
    std::array<double, 3> d_de0;
    std::array<double, 3> d_dv0;
};
KiteRhsJacobian kite_rhs_jacobian(const KiteState& x, double u, double v0, double e0,
                                  const KiteParams& p);

// Tether thrust [N].
double thrust(const KiteState& x, double v0, double u, double e0, const KiteParams& p);

struct ThrustGradient {
    double d_theta = 0.0;
    double d_phi = 0.0;
    double d_u = 0.0;
};
ThrustGradient thrust_gradient(const KiteState& x, double v0, double u, double e0,
                               const KiteParams& p);

// Kite height above ground [m].
double height(const KiteState& x, const KiteParams& p);

// d(height)/d(theta, phi).
std::array<double, 2> height_gradient(const KiteState& x, const KiteParams& p);

// Instantaneous wind speed from the filter state.
double wind_speed(double p_v, const WindParams& wp);

// Advance the turbulence filter by dt with w_tb held at `noise`; the filter
// ODE is linear, so this uses the exact solution. Returns the new state and
// the wind speed at the end of the interval.
std::pair<WindState, double> wind_step(const WindState& ws, const WindParams& wp,
                                       double dt, double noise);

// Classical RK4 step for a small fixed-size ODE. Rhs: (const std::array&) -> std::array.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const std::array<double, N>& x, double dt, Rhs&& rhs) {
    const auto k1 = rhs(x);
    std::array<double, N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + dt * k3[i];
    const auto k4 = rhs(tmp);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace kitecert
