#pragma once

#include <Eigen/Dense>
#include <array>

#include "kitecert/kite.hpp"
#include "kitecert/simulate.hpp"

namespace kitecert {

using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

struct EkfConfig {
    std::array<double, 5> p0_diag{1e-2, 1e-2, 1e-2, 1.0, 2e-1};
    std::array<double, 5> q_diag{1e-5, 1e-5, 1e-4, 1e-5, 3e-3};
    std::array<double, 3> r_diag{1e-2, 1e-2, 5e-2};
    double t_ekf = 0.05;

    void validate() const;
};

// Filter state over the augmented vector [theta, phi, psi, E0, v0]. The
// covariance is kept symmetric PSD: symmetrized after every step and
// eigenvalue-floored at zero if rounding drives it indefinite.
struct EkfState {
    Vector5d x_hat = Vector5d::Zero();
    Matrix5d p = Matrix5d::Zero();
};

// Mean propagated by one RK4 step of the kite ODE over dt with E0 and v0 held
// constant (random-walk parameter model); covariance via the discrete-time
// Jacobian of that map, with Q scaled by dt / t_ekf for partial steps.
EkfState ekf_predict(const EkfState& s, double u, double dt, const EkfConfig& cfg,
                     const KiteParams& kp);

// Discrete-time Jacobian of the predict map, exposed for verification against
// finite differences.
Matrix5d ekf_discrete_jacobian(const Vector5d& x_hat, double u, double dt,
                               const KiteParams& kp);

// Propagation of the mean alone (the map whose Jacobian is above).
Vector5d ekf_propagate_mean(const Vector5d& x_hat, double u, double dt,
                            const KiteParams& kp);

// Measurement update with y = [theta, phi, v0]; Joseph-form covariance update.
// Throws on a numerically singular innovation covariance.
EkfState ekf_update(const EkfState& s, const std::array<double, 3>& y,
                    const EkfConfig& cfg);

// Multiplicative initialization: x_hat(0) = elementwise product of the true
// augmented state and the scenario's init deltas; P = P0.
EkfState init_estimate(const std::array<double, 5>& x_true_aug,
                       const std::array<double, 5>& deltas, const EkfConfig& cfg);

double min_covariance_eigenvalue(const EkfState& s);

// StateEstimator adapter used by the closed-loop driver.
class Ekf final : public StateEstimator {
public:
    Ekf(const EkfConfig& cfg, const KiteParams& kp) : cfg_(cfg), kp_(kp) {}

    void init(const std::array<double, 5>& x_hat0) override;
    void predict(double u, double dt) override;
    void update(const std::array<double, 3>& y) override;
    std::array<double, 5> estimate() const override;

    const EkfState& state() const { return state_; }

private:
    EkfConfig cfg_;
    KiteParams kp_;
    EkfState state_;
};

}  // namespace kitecert
