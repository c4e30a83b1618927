#include "kitecert/ekf.hpp"

#include <stdexcept>

namespace kitecert {

namespace {

Vector5d aug_rhs(const Vector5d& x, double u, const KiteParams& kp) {
    const KiteState ks{x(0), x(1), x(2)};
    const auto d = kite_rhs(ks, u, x(4), x(3), kp);
    Vector5d out;
    out << d[0], d[1], d[2], 0.0, 0.0;
    return out;
}

Matrix5d aug_jacobian(const Vector5d& x, double u, const KiteParams& kp) {
    const KiteState ks{x(0), x(1), x(2)};
    const auto j = kite_rhs_jacobian(ks, u, x(4), x(3), kp);
    Matrix5d a = Matrix5d::Zero();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) = j.d_dx[r][c];
        a(r, 3) = j.d_de0[r];
        a(r, 4) = j.d_dv0[r];
    }
    return a;
}

void enforce_psd(Matrix5d& p) {
    p = 0.5 * (p + p.transpose()).eval();
    Eigen::LLT<Matrix5d> llt(p);
    if (llt.info() == Eigen::Success) return;
    Eigen::SelfAdjointEigenSolver<Matrix5d> es(p);
    Vector5d ev = es.eigenvalues().cwiseMax(0.0);
    p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    p = 0.5 * (p + p.transpose()).eval();
}

}  // namespace

void EkfConfig::validate() const {
    for (double v : p0_diag)
        if (v < 0) throw std::invalid_argument("EkfConfig: P0 diagonal must be >= 0");
    for (double v : q_diag)
        if (v < 0) throw std::invalid_argument("EkfConfig: Q diagonal must be >= 0");
    for (double v : r_diag)
        if (v <= 0) throw std::invalid_argument("EkfConfig: R diagonal must be > 0");
    if (t_ekf <= 0) throw std::invalid_argument("EkfConfig: t_ekf must be positive");
}

Vector5d ekf_propagate_mean(const Vector5d& x_hat, double u, double dt,
                            const KiteParams& kp) {
    std::array<double, 5> x{x_hat(0), x_hat(1), x_hat(2), x_hat(3), x_hat(4)};
    const auto next = rk4_step<5>(x, dt, [&](const std::array<double, 5>& s) {
        Vector5d v;
        v << s[0], s[1], s[2], s[3], s[4];
        const Vector5d d = aug_rhs(v, u, kp);
        return std::array<double, 5>{d(0), d(1), d(2), d(3), d(4)};
    });
    Vector5d out;
    out << next[0], next[1], next[2], next[3], next[4];
    return out;
}

Matrix5d ekf_discrete_jacobian(const Vector5d& x_hat, double u, double dt,
                               const KiteParams& kp) {
    // Tangent propagation through the RK4 stages.
    const Matrix5d eye = Matrix5d::Identity();

    const Vector5d k1 = aug_rhs(x_hat, u, kp);
    const Matrix5d m1 = aug_jacobian(x_hat, u, kp);

    const Vector5d x2 = x_hat + 0.5 * dt * k1;
    const Vector5d k2 = aug_rhs(x2, u, kp);
    const Matrix5d m2 = aug_jacobian(x2, u, kp) * (eye + 0.5 * dt * m1);

    const Vector5d x3 = x_hat + 0.5 * dt * k2;
    const Vector5d k3 = aug_rhs(x3, u, kp);
    const Matrix5d m3 = aug_jacobian(x3, u, kp) * (eye + 0.5 * dt * m2);

    const Vector5d x4 = x_hat + dt * k3;
    const Matrix5d m4 = aug_jacobian(x4, u, kp) * (eye + dt * m3);
    (void)k3;

    return eye + dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

EkfState ekf_predict(const EkfState& s, double u, double dt, const EkfConfig& cfg,
                     const KiteParams& kp) {
    EkfState out;
    out.x_hat = ekf_propagate_mean(s.x_hat, u, dt, kp);
    const Matrix5d f = ekf_discrete_jacobian(s.x_hat, u, dt, kp);
    Matrix5d q = Matrix5d::Zero();
    for (int i = 0; i < 5; ++i) q(i, i) = cfg.q_diag[i] * (dt / cfg.t_ekf);
    out.p = f * s.p * f.transpose() + q;
    enforce_psd(out.p);
    return out;
}

EkfState ekf_update(const EkfState& s, const std::array<double, 3>& y,
                    const EkfConfig& cfg) {
    // H selects theta, phi and v0 from the augmented state.
    Eigen::Matrix<double, 3, 5> h = Eigen::Matrix<double, 3, 5>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    h(2, 4) = 1.0;

    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) r(i, i) = cfg.r_diag[i];

    const Eigen::Matrix3d innov_cov = h * s.p * h.transpose() + r;
    Eigen::LLT<Eigen::Matrix3d> llt(innov_cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("ekf_update: singular innovation covariance");

    const Eigen::Matrix<double, 5, 3> k = s.p * h.transpose() * llt.solve(Eigen::Matrix3d::Identity());

    Eigen::Vector3d yv, innov;
    yv << y[0], y[1], y[2];
    innov = yv - h * s.x_hat;

    EkfState out;
    out.x_hat = s.x_hat + k * innov;
    const Matrix5d ikh = Matrix5d::Identity() - k * h;
    out.p = ikh * s.p * ikh.transpose() + k * r * k.transpose();
    enforce_psd(out.p);
    return out;
}

EkfState init_estimate(const std::array<double, 5>& x_true_aug,
                       const std::array<double, 5>& deltas, const EkfConfig& cfg) {
    const auto x0 = multiplicative_init(x_true_aug, deltas);
    EkfState s;
    for (int i = 0; i < 5; ++i) {
        s.x_hat(i) = x0[i];
        s.p(i, i) = cfg.p0_diag[i];
    }
    return s;
}

double min_covariance_eigenvalue(const EkfState& s) {
    Eigen::SelfAdjointEigenSolver<Matrix5d> es(s.p);
    return es.eigenvalues().minCoeff();
}

void Ekf::init(const std::array<double, 5>& x_hat0) {
    state_ = EkfState{};
    for (int i = 0; i < 5; ++i) {
        state_.x_hat(i) = x_hat0[i];
        state_.p(i, i) = cfg_.p0_diag[i];
    }
}

void Ekf::predict(double u, double dt) { state_ = ekf_predict(state_, u, dt, cfg_, kp_); }

void Ekf::update(const std::array<double, 3>& y) { state_ = ekf_update(state_, y, cfg_); }

std::array<double, 5> Ekf::estimate() const {
    return {state_.x_hat(0), state_.x_hat(1), state_.x_hat(2), state_.x_hat(3),
            state_.x_hat(4)};
}

}  // namespace kitecert
