#include "kitecert/kite.hpp"

namespace kitecert {

void KiteParams::validate() const {
    if (c_tilde <= 0 || rho <= 0 || h_min <= 0 || tether_length <= 0 || area <= 0)
        throw std::invalid_argument("KiteParams: all parameters except beta must be positive");
    if (tether_length <= h_min)
        throw std::invalid_argument("KiteParams: tether_length must exceed h_min or the height constraint is unattainable");
}

void WindParams::validate() const {
    if (k_sigma_v <= 0 || l_v <= 0 || t_v <= 0 || v_m <= 0)
        throw std::invalid_argument("WindParams: all parameters must be positive");
}

double glide_ratio(double e0, double u, const KiteParams& p) {
    return e0 - p.c_tilde * u * u;
}

std::array<double, 3> kite_rhs(const KiteState& x, double u, double v0, double e0,
                               const KiteParams& p) {
    const double e = glide_ratio(e0, u, p);
    const double ct = std::cos(x.theta);
    const double st = std::sin(x.theta);
    const double cp = std::cos(x.psi);
    const double sp = std::sin(x.psi);
    const double va = v0 * e * ct;
    const double lt = p.tether_length;

    const double dtheta = va / lt * (cp - std::tan(x.theta) / e);
    const double dphi = -va / (lt * st) * sp;
    const double dpsi = va / lt * u + dphi * ct;
    return {dtheta, dphi, dpsi};
}

KiteRhsJacobian kite_rhs_jacobian(const KiteState& x, double u, double v0, double e0,
                                  const KiteParams& p) {
    const double e = glide_ratio(e0, u, p);
    const double de_du = -2.0 * p.c_tilde * u;
    const double ct = std::cos(x.theta);
    const double st = std::sin(x.theta);
    const double tt = st / ct;
    const double cp = std::cos(x.psi);
    const double sp = std::sin(x.psi);
    const double lt = p.tether_length;
    const double cot = ct / st;
    const double csc2 = 1.0 / (st * st);
    const double sec2 = 1.0 / (ct * ct);

    // f1 = (v0 ct / lt) (e cp - tt),  f2 = -(v0 e / lt) cot sp,
    // f3 = (v0 e ct / lt) u + f2 ct
    const double s = v0 * ct / lt;
    const double f2 = -(v0 * e / lt) * cot * sp;

    KiteRhsJacobian j{};

    // f1
    j.d_dx[0][0] = -(v0 * st / lt) * (e * cp - tt) + s * (-sec2);
    j.d_dx[0][1] = 0.0;
    j.d_dx[0][2] = s * (-e * sp);
    j.d_de0[0] = s * cp;
    j.d_dv0[0] = (ct / lt) * (e * cp - tt);
    j.d_du[0] = s * cp * de_du;

    // f2
    const double df2_dtheta = (v0 * e / lt) * sp * csc2;
    const double df2_dpsi = -(v0 * e / lt) * cot * cp;
    const double df2_de0 = -(v0 / lt) * cot * sp;
    const double df2_dv0 = -(e / lt) * cot * sp;
    const double df2_du = -(v0 / lt) * cot * sp * de_du;
    j.d_dx[1][0] = df2_dtheta;
    j.d_dx[1][1] = 0.0;
    j.d_dx[1][2] = df2_dpsi;
    j.d_de0[1] = df2_de0;
    j.d_dv0[1] = df2_dv0;
    j.d_du[1] = df2_du;

    // f3
    j.d_dx[2][0] = -(v0 * e * st / lt) * u + df2_dtheta * ct - f2 * st;
    j.d_dx[2][1] = 0.0;
    j.d_dx[2][2] = df2_dpsi * ct;
    j.d_de0[2] = (v0 * ct / lt) * u + df2_de0 * ct;
    j.d_dv0[2] = (e * ct / lt) * u + df2_dv0 * ct;
    j.d_du[2] = (v0 * ct / lt) * (e + u * de_du) + df2_du * ct;

    return j;
}

double thrust(const KiteState& x, double v0, double u, double e0, const KiteParams& p) {
    const double e = glide_ratio(e0, u, p);
    const double ct = std::cos(x.theta);
    const double st = std::sin(x.theta);
    const double q = 0.5 * p.rho * v0 * v0 * p.area;
    const double g = (e + 1.0) * std::sqrt(e * e + 1.0);
    const double dir = ct * std::cos(p.beta) + st * std::sin(p.beta) * std::sin(x.phi);
    return q * ct * ct * g * dir;
}

ThrustGradient thrust_gradient(const KiteState& x, double v0, double u, double e0,
                               const KiteParams& p) {
    const double e = glide_ratio(e0, u, p);
    const double de_du = -2.0 * p.c_tilde * u;
    const double ct = std::cos(x.theta);
    const double st = std::sin(x.theta);
    const double cb = std::cos(p.beta);
    const double sb = std::sin(p.beta);
    const double sphi = std::sin(x.phi);
    const double cphi = std::cos(x.phi);
    const double q = 0.5 * p.rho * v0 * v0 * p.area;
    const double root = std::sqrt(e * e + 1.0);
    const double g = (e + 1.0) * root;
    const double dg_de = root + (e + 1.0) * e / root;
    const double dir = ct * cb + st * sb * sphi;

    ThrustGradient out;
    out.d_theta = q * g * (-2.0 * ct * st * dir + ct * ct * (-st * cb + ct * sb * sphi));
    out.d_phi = q * ct * ct * g * st * sb * cphi;
    out.d_u = q * ct * ct * dir * dg_de * de_du;
    return out;
}

double height(const KiteState& x, const KiteParams& p) {
    return p.tether_length * std::sin(x.theta) * std::cos(x.phi);
}

std::array<double, 2> height_gradient(const KiteState& x, const KiteParams& p) {
    return {p.tether_length * std::cos(x.theta) * std::cos(x.phi),
            -p.tether_length * std::sin(x.theta) * std::sin(x.phi)};
}

double wind_speed(double p_v, const WindParams& wp) {
    return wp.v_m + wp.v_bar_n() + wp.sigma_v() * wp.c_v() * p_v;
}

std::pair<WindState, double> wind_step(const WindState& ws, const WindParams& wp,
                                       double dt, double noise) {
    if (dt <= 0.0) throw std::invalid_argument("wind_step: dt must be positive");
    const double tau = wp.tau_f();
    const double decay = std::exp(-dt / tau);
    WindState out;
    out.w_tb = noise;
    out.p_v = ws.p_v * decay + noise * tau * (1.0 - decay);
    return {out, wind_speed(out.p_v, wp)};
}

}  // namespace kitecert
