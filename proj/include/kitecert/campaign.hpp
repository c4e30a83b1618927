#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kitecert/ekf.hpp"
#include "kitecert/indicators.hpp"
#include "kitecert/mlp.hpp"
#include "kitecert/msnmpc.hpp"
#include "kitecert/validation.hpp"

namespace kitecert {

struct ControllerSpec {
    enum class Type { ms, dnn };
    Type type = Type::dnn;
    double eta = 0.0;
    std::string params_path;  // dnn only
    std::string id;           // defaults to "<type>_eta<eta>"

    std::string resolved_id() const;
};

struct CampaignConfig {
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    int workers = 0;
    RiskSpec risk{0.02, 1e-6, 4, 4};
    int n_override = 0;  // 0: use min_samples(risk); otherwise must satisfy the binomial inequality
    DistributionSpec dist = DistributionSpec::uniform_row();
    SimConfig sim;
    KiteParams kite;
    WindParams wind;
    EkfConfig ekf;
    TreeConfig tree;
    OcpConfig ocp;  // eta is taken from each controller spec
    IndicatorSpec indicator;
    double threshold = 0.0;
    std::vector<ControllerSpec> family;
    bool persist_trajectories = true;
    double degraded_fault_fraction = 0.05;

    void validate() const;
    static CampaignConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct ControllerResult {
    std::string id;
    std::string type;
    double eta = 0.0;
    int feasible = 0;          // runs with height margin <= 0
    double level = 0.0;        // psi(v, r) of the certification indicator
    double mean_thrust_n = 0.0;
    bool safe = false;
    int faults = 0;            // simulation faults + solver fallbacks
};

struct CampaignReport {
    int n_scenarios = 0;
    std::uint64_t scenario_hash = 0;
    Certificate certificate;
    std::vector<ControllerResult> controllers;
    std::vector<IndicatorVector> vectors;
    bool degraded = false;
    double wall_seconds = 0.0;  // informational; never persisted
};

struct RobustnessRow {
    std::string distribution;
    std::string controller_id;
    int feasible = 0;
    int n = 0;
    double level = 0.0;
};

struct RobustnessReport {
    std::vector<RobustnessRow> rows;
};

// Instantiates a fresh controller for one closed loop (tree controllers own
// warm-start state; network controllers are cheap copies).
std::unique_ptr<Controller> make_controller(const ControllerSpec& spec,
                                            const CampaignConfig& cfg);

// N scenarios generated once, every family member simulated on the identical
// set, indicators evaluated, family certificate issued. Trajectories are
// persisted under <output_dir>/trajectories/<controller>/ unless disabled.
CampaignReport run_campaign(const CampaignConfig& cfg);

// Re-evaluates the family under alternative sampling distributions with the
// same master seed and N; reports feasible counts and levels per row.
RobustnessReport robustness_study(const CampaignConfig& cfg,
                                  const std::vector<DistributionSpec>& alternatives);

// Markdown + CSV tables, certificate JSON and SVG plots under out_dir.
void emit_report(const CampaignReport& report, const CampaignConfig& cfg,
                 const std::string& out_dir);
void emit_robustness_report(const RobustnessReport& report, const std::string& out_dir);

// Rebuilds the report purely from persisted trajectories (no re-simulation);
// used for post-hoc audits and the byte-identical round-trip check.
CampaignReport report_from_persisted(const CampaignConfig& cfg,
                                     const std::string& out_dir);

}  // namespace kitecert
