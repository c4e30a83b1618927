#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kitecert/kite.hpp"
#include "kitecert/scenario.hpp"
#include "kitecert/simulate.hpp"

namespace kitecert {

// Uncertainty bounds represented in the tree, plus the prediction horizon.
struct TreeConfig {
    double e0_lo = 4.0;
    double e0_hi = 6.0;
    double v0_lo = 6.0;
    double v0_hi = 10.0;
    int n_p = 40;
};

// Robust-horizon-1 scenario tree: one shared input at stage 0, then one
// independent input sequence per realization. Each branch carries a fixed
// (E0, v0) pair.
struct ScenarioTree {
    struct Branch {
        double e0 = 5.0;
        double v0 = 8.0;
    };

    std::vector<Branch> branches;
    int n_p = 40;
    int robust_horizon = 1;

    // The four combinations of the extreme values.
    static ScenarioTree build(const TreeConfig& cfg);
    // Degenerate single-branch tree (nominal MPC).
    static ScenarioTree single(double e0, double v0, int n_p);

    int decision_count() const {
        return 1 + static_cast<int>(branches.size()) * (n_p - 1);
    }
    Branch nominal() const;
    void validate() const;
};

struct OcpConfig {
    double eta = 0.0;                  // height-constraint backoff [m]
    double w_f = 1e-4;
    double w_u = 0.5;
    double t_c = 0.15;
    double soft_penalty_weight = 1e3;  // per m^2 of violation of h >= h_min + eta
    double u_min = -10.0;
    double u_max = 10.0;
    // Projected-gradient inf-norm of the node-averaged objective; the average
    // keeps the tolerance meaningful at any horizon/branch count.
    double stat_tol = 1e-6;
    int max_iter = 500;
    bool terminal_height_penalty = false;  // optional terminal ingredient, off by default

    void validate() const;
};

enum class SolveStatus { converged, max_iter, fault };

struct NlpSolution {
    double u0 = 0.0;
    std::vector<double> z;       // full decision vector
    double objective = 0.0;
    double kkt_residual = 0.0;   // projected-gradient inf-norm at exit
    int iterations = 0;
    SolveStatus status = SolveStatus::fault;
    // Predicted node states, [branch][stage 0..n_p].
    std::vector<std::vector<KiteState>> nodes;
    // Smallest predicted height over the constrained stages (1..n_p-1).
    double min_predicted_height = 0.0;
};

// Penalized objective of the tree optimal-control problem: stage costs summed
// over nodes, quadratic soft penalty on h >= h_min + eta, single-RK4-step
// branch dynamics over t_c. Exposed for the solver and for verification.
double ocp_objective(std::span<const double> z, const KiteState& x0, double u_prev,
                     const ScenarioTree& tree, const OcpConfig& cfg,
                     const KiteParams& kp);

// Same value plus the exact gradient via a discrete adjoint sweep.
double ocp_objective_gradient(std::span<const double> z, const KiteState& x0,
                              double u_prev, const ScenarioTree& tree,
                              const OcpConfig& cfg, const KiteParams& kp,
                              std::span<double> grad);

// Projected L-BFGS solve with box input bounds. warm_start may be empty
// (hold-previous-input initialization) or a full decision vector.
NlpSolution solve_ocp(const KiteState& x0, double u_prev, const ScenarioTree& tree,
                      const OcpConfig& cfg, const KiteParams& kp,
                      std::span<const double> warm_start = {});

// Cold-start solve that also tries the two crosswind-entry turn profiles
// (sustained left/right deflection long enough to rotate the kite through
// half a revolution, then glide) and keeps the lowest objective. The plain
// hold-input start frequently polishes into a "park near the zenith" local
// optimum whose thrust is far below the crosswind pattern's.
NlpSolution solve_ocp_multistart(const KiteState& x0, double u_prev,
                                 const ScenarioTree& tree, const OcpConfig& cfg,
                                 const KiteParams& kp);

// Receding-horizon feedback law around solve_ocp. One instance per closed
// loop: it owns the warm-start shift state. On a solver fault the commanded
// input falls back to the clipped previous input and last_ok() reports false.
class MsNmpcController final : public Controller {
public:
    MsNmpcController(ScenarioTree tree, OcpConfig cfg, KiteParams kp, std::string id);

    double compute(const std::array<double, 5>& x_hat_aug, double u_prev) override;
    bool last_ok() const override { return last_ok_; }
    std::string id() const override { return id_; }
    void reset() override { warm_.clear(); }

    const NlpSolution& last_solution() const { return last_; }

private:
    ScenarioTree tree_;
    OcpConfig cfg_;
    KiteParams kp_;
    std::string id_;
    std::vector<double> warm_;
    NlpSolution last_;
    bool last_ok_ = true;
};

// Training-data extraction.
enum class DatasetKind { opt, feas };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::opt;
    int n_traj = 10;       // opt: closed-loop rollouts
    int steps = 100;       // opt: steps per rollout
    int n_samples = 1000;  // feas: random states
    double eta = 0.0;
    std::uint64_t seed = 1;
    int threads = 0;
    // feas sampling box (degrees for the angles)
    double theta_min_deg = 15.0;
    double theta_max_deg = 75.0;
    double phi_abs_max_deg = 60.0;
    double psi_abs_max_deg = 180.0;
};

struct DatasetPoint {
    double theta = 0.0;
    double phi = 0.0;
    double psi = 0.0;
    double u_prev = 0.0;
    double u_target = 0.0;
};

struct Dataset {
    std::vector<DatasetPoint> points;
    std::string kind;
    double eta = 0.0;
    std::uint64_t seed = 0;
    int solver_faults = 0;
};

// kind == opt: state-feedback closed loops under the exact tree controller;
// every (state, previous input) -> input pair is recorded.
// kind == feas: states sampled uniformly from the box, rejecting those below
// the tightened height constraint; one cold solve per kept sample.
// Solver faults are skipped and counted.
Dataset generate_dataset(const DatasetConfig& dc, const DistributionSpec& dist,
                         const ScenarioTree& tree, const OcpConfig& ocp,
                         const KiteParams& kp, const WindParams& wind,
                         const SimConfig& sim_template);

}  // namespace kitecert
