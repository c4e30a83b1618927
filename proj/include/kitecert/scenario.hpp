#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kitecert/kite.hpp"

namespace kitecert {

// Control-loop timing and horizon.
struct SimConfig {
    double t_c = 0.15;        // controller period [s]
    double t_ekf = 0.05;      // estimator period [s]
    int n_sim = 400;          // control steps (60 s at defaults)
    double substep = 0.05;    // integrator step [s]
    double input_delay = 0.0; // applied-input delay [s], < t_c
    bool state_feedback = false;

    int ekf_per_control() const;  // t_c / t_ekf
    int ekf_steps_total() const { return n_sim * ekf_per_control(); }
    void validate() const;
};

enum class DistFamily { uniform, normal, beta, pareto };

DistFamily dist_family_from_string(const std::string& s);
std::string to_string(DistFamily f);

// One (a, b) pair per sampled variable. Meaning depends on the family:
//   uniform: lower/upper bound
//   normal:  mean / standard deviation
//   beta:    scaling / offset applied to a Beta(2,5) draw
//   pareto:  tail index / offset applied to a unit-scale type-I draw
struct VariablePair {
    double a = 0.0;
    double b = 0.0;
};

struct DistributionSpec {
    DistFamily family = DistFamily::uniform;
    VariablePair theta0_deg{28.0, 30.0};
    VariablePair phi0_deg{-10.0, 10.0};
    VariablePair psi0_deg{-2.0, 2.0};
    VariablePair e0{4.0, 6.0};
    VariablePair v_m{7.0, 9.0};

    // The four benchmark rows.
    static DistributionSpec uniform_row();
    static DistributionSpec normal_row();
    static DistributionSpec beta_row();
    static DistributionSpec pareto_row();

    void validate() const;
};

// A complete uncertainty realization: everything random about one closed-loop
// run. Regenerable from (master_seed, index); the simulator draws nothing.
struct Scenario {
    std::uint64_t master_seed = 0;
    std::uint64_t index = 0;

    KiteState x0;
    double e0 = 5.0;
    double v_m = 8.0;
    double p_v0 = 0.0;
    double u_prev0 = 0.0;
    std::array<double, 5> init_deltas{1, 1, 1, 1, 1};
    std::vector<double> w_tb;                          // one per control period
    std::vector<std::array<double, 3>> meas_noise;     // one triple per estimator update

    std::string id() const;
};

Scenario sample_scenario(const DistributionSpec& spec, const SimConfig& cfg,
                         std::uint64_t master_seed, std::uint64_t index);

std::vector<Scenario> scenario_batch(const DistributionSpec& spec, const SimConfig& cfg,
                                     std::uint64_t master_seed, std::size_t n);

// FNV-1a over the numeric content; campaigns record it to prove every
// controller saw the identical scenario set.
std::uint64_t batch_hash(const std::vector<Scenario>& batch);

}  // namespace kitecert
