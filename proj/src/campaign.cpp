#include "kitecert/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "kitecert/io.hpp"
#include "kitecert/parallel.hpp"

namespace kitecert {

namespace {
using nlohmann::json;

std::string eta_tag(double eta) {
    std::ostringstream ss;
    ss << eta;
    return ss.str();
}

json variable_pair(const VariablePair& p) { return json::array({p.a, p.b}); }
VariablePair pair_from(const json& j) { return VariablePair{j.at(0), j.at(1)}; }

struct ScenarioOutcome {
    double indicator = 0.0;
    double margin = 0.0;
    double avg_thrust = 0.0;
    bool faulted = false;
    bool solver_fallback = false;
};

ScenarioOutcome outcome_from_record(const TrajectoryRecord& rec,
                                    const IndicatorSpec& ind) {
    ScenarioOutcome o;
    o.indicator = evaluate_indicator(rec, ind);
    IndicatorSpec margin_spec = ind;
    margin_spec.kind = IndicatorKind::height_margin;
    o.margin = height_margin(rec, margin_spec);
    o.avg_thrust = rec.faulted ? 0.0 : -neg_avg_thrust(rec);
    o.faulted = rec.faulted;
    o.solver_fallback =
        std::any_of(rec.solver_ok.begin(), rec.solver_ok.end(),
                    [](std::uint8_t ok) { return ok == 0; });
    return o;
}

ControllerResult summarize(const std::string& id, const std::string& type, double eta,
                           const std::vector<ScenarioOutcome>& outcomes) {
    ControllerResult r;
    r.id = id;
    r.type = type;
    r.eta = eta;
    double thrust_sum = 0.0;
    int thrust_n = 0;
    for (const auto& o : outcomes) {
        if (o.margin <= 0.0) ++r.feasible;
        if (o.faulted || o.solver_fallback) ++r.faults;
        if (!o.faulted) {
            thrust_sum += o.avg_thrust;
            ++thrust_n;
        }
    }
    r.mean_thrust_n = thrust_n ? thrust_sum / thrust_n : 0.0;
    return r;
}

}  // namespace

std::string ControllerSpec::resolved_id() const {
    if (!id.empty()) return id;
    return std::string(type == Type::ms ? "ms" : "dnn") + "_eta" + eta_tag(eta);
}

void CampaignConfig::validate() const {
    risk.validate();
    dist.validate();
    sim.validate();
    kite.validate();
    ekf.validate();
    if (family.empty()) throw std::invalid_argument("CampaignConfig: empty controller family");
    if (static_cast<int>(family.size()) != risk.m)
        throw std::invalid_argument(
            "CampaignConfig: family size must equal RiskSpec.m (got " +
            std::to_string(family.size()) + " vs " + std::to_string(risk.m) + ")");
    for (const auto& c : family) {
        if (c.eta < 0) throw std::invalid_argument("CampaignConfig: eta must be >= 0");
        if (c.type == ControllerSpec::Type::dnn && c.params_path.empty())
            throw std::invalid_argument("CampaignConfig: dnn controller needs params_path");
    }
    if (n_override < 0) throw std::invalid_argument("CampaignConfig: n_override must be >= 0");
    if (degraded_fault_fraction < 0 || degraded_fault_fraction > 1)
        throw std::invalid_argument("CampaignConfig: degraded_fault_fraction in [0,1]");
}

CampaignConfig CampaignConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    CampaignConfig c;
    c.master_seed = j.value("master_seed", c.master_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);
    c.n_override = j.value("n_override", c.n_override);
    c.threshold = j.value("threshold", c.threshold);
    c.persist_trajectories = j.value("persist_trajectories", c.persist_trajectories);
    c.degraded_fault_fraction = j.value("degraded_fault_fraction", c.degraded_fault_fraction);

    if (j.contains("risk")) {
        const auto& r = j["risk"];
        c.risk.epsilon = r.value("epsilon", c.risk.epsilon);
        c.risk.delta = r.value("delta", c.risk.delta);
        c.risk.r = r.value("r", c.risk.r);
        c.risk.m = r.value("m", c.risk.m);
    }
    if (j.contains("distribution")) {
        const auto& d = j["distribution"];
        c.dist.family = dist_family_from_string(d.value("family", std::string("uniform")));
        if (d.contains("theta0_deg")) c.dist.theta0_deg = pair_from(d["theta0_deg"]);
        if (d.contains("phi0_deg")) c.dist.phi0_deg = pair_from(d["phi0_deg"]);
        if (d.contains("psi0_deg")) c.dist.psi0_deg = pair_from(d["psi0_deg"]);
        if (d.contains("e0")) c.dist.e0 = pair_from(d["e0"]);
        if (d.contains("v_m")) c.dist.v_m = pair_from(d["v_m"]);
    }
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        c.sim.t_c = s.value("t_c", c.sim.t_c);
        c.sim.t_ekf = s.value("t_ekf", c.sim.t_ekf);
        c.sim.n_sim = s.value("n_sim", c.sim.n_sim);
        c.sim.substep = s.value("substep", c.sim.substep);
        c.sim.input_delay = s.value("input_delay", c.sim.input_delay);
        c.sim.state_feedback = s.value("state_feedback", c.sim.state_feedback);
    }
    if (j.contains("plant")) {
        const auto& p = j["plant"];
        c.kite.c_tilde = p.value("c_tilde", c.kite.c_tilde);
        c.kite.beta = p.value("beta", c.kite.beta);
        c.kite.rho = p.value("rho", c.kite.rho);
        c.kite.h_min = p.value("h_min", c.kite.h_min);
        c.kite.tether_length = p.value("tether_length", c.kite.tether_length);
        c.kite.area = p.value("area", c.kite.area);
        c.kite.e0_nominal = p.value("e0_nominal", c.kite.e0_nominal);
    }
    if (j.contains("wind")) {
        const auto& w = j["wind"];
        c.wind.k_sigma_v = w.value("k_sigma_v", c.wind.k_sigma_v);
        c.wind.l_v = w.value("l_v", c.wind.l_v);
        c.wind.t_v = w.value("t_v", c.wind.t_v);
        c.wind.v_m = w.value("v_m", c.wind.v_m);
    }
    if (j.contains("ekf")) {
        const auto& e = j["ekf"];
        if (e.contains("p0_diag")) c.ekf.p0_diag = e["p0_diag"];
        if (e.contains("q_diag")) c.ekf.q_diag = e["q_diag"];
        if (e.contains("r_diag")) c.ekf.r_diag = e["r_diag"];
    }
    c.ekf.t_ekf = c.sim.t_ekf;
    if (j.contains("tree")) {
        const auto& t = j["tree"];
        c.tree.e0_lo = t.value("e0_lo", c.tree.e0_lo);
        c.tree.e0_hi = t.value("e0_hi", c.tree.e0_hi);
        c.tree.v0_lo = t.value("v0_lo", c.tree.v0_lo);
        c.tree.v0_hi = t.value("v0_hi", c.tree.v0_hi);
        c.tree.n_p = t.value("n_p", c.tree.n_p);
    }
    if (j.contains("ocp")) {
        const auto& o = j["ocp"];
        c.ocp.w_f = o.value("w_f", c.ocp.w_f);
        c.ocp.w_u = o.value("w_u", c.ocp.w_u);
        c.ocp.soft_penalty_weight = o.value("soft_penalty_weight", c.ocp.soft_penalty_weight);
        c.ocp.u_min = o.value("u_min", c.ocp.u_min);
        c.ocp.u_max = o.value("u_max", c.ocp.u_max);
        c.ocp.stat_tol = o.value("stat_tol", c.ocp.stat_tol);
        c.ocp.max_iter = o.value("max_iter", c.ocp.max_iter);
        c.ocp.terminal_height_penalty =
            o.value("terminal_height_penalty", c.ocp.terminal_height_penalty);
    }
    c.ocp.t_c = c.sim.t_c;
    if (j.contains("indicator")) {
        const auto& i = j["indicator"];
        c.indicator.kind =
            indicator_kind_from_string(i.value("kind", std::string("height_margin")));
        c.indicator.h_min = i.value("h_min", c.kite.h_min);
        c.indicator.w_f = i.value("w_f", c.indicator.w_f);
        c.indicator.w_u = i.value("w_u", c.indicator.w_u);
    } else {
        c.indicator.h_min = c.kite.h_min;
    }
    if (j.contains("controllers")) {
        for (const auto& e : j["controllers"]) {
            ControllerSpec s;
            const std::string type = e.value("type", std::string("dnn"));
            if (type == "ms")
                s.type = ControllerSpec::Type::ms;
            else if (type == "dnn")
                s.type = ControllerSpec::Type::dnn;
            else
                throw std::invalid_argument("CampaignConfig: unknown controller type " + type);
            s.eta = e.value("eta", 0.0);
            s.params_path = e.value("params", std::string());
            s.id = e.value("id", std::string());
            c.family.push_back(s);
        }
    }
    c.validate();
    return c;
}

std::string CampaignConfig::to_json_text() const {
    json j;
    j["master_seed"] = master_seed;
    j["output_dir"] = output_dir;
    j["workers"] = workers;
    j["n_override"] = n_override;
    j["threshold"] = threshold;
    j["persist_trajectories"] = persist_trajectories;
    j["degraded_fault_fraction"] = degraded_fault_fraction;
    j["risk"] = {{"epsilon", risk.epsilon}, {"delta", risk.delta}, {"r", risk.r}, {"m", risk.m}};
    j["distribution"] = {{"family", to_string(dist.family)},
                         {"theta0_deg", variable_pair(dist.theta0_deg)},
                         {"phi0_deg", variable_pair(dist.phi0_deg)},
                         {"psi0_deg", variable_pair(dist.psi0_deg)},
                         {"e0", variable_pair(dist.e0)},
                         {"v_m", variable_pair(dist.v_m)}};
    j["sim"] = {{"t_c", sim.t_c},          {"t_ekf", sim.t_ekf},
                {"n_sim", sim.n_sim},      {"substep", sim.substep},
                {"input_delay", sim.input_delay}, {"state_feedback", sim.state_feedback}};
    j["plant"] = {{"c_tilde", kite.c_tilde}, {"beta", kite.beta},
                  {"rho", kite.rho},         {"h_min", kite.h_min},
                  {"tether_length", kite.tether_length}, {"area", kite.area},
                  {"e0_nominal", kite.e0_nominal}};
    j["wind"] = {{"k_sigma_v", wind.k_sigma_v}, {"l_v", wind.l_v}, {"t_v", wind.t_v},
                 {"v_m", wind.v_m}};
    j["ekf"] = {{"p0_diag", ekf.p0_diag}, {"q_diag", ekf.q_diag}, {"r_diag", ekf.r_diag}};
    j["tree"] = {{"e0_lo", tree.e0_lo}, {"e0_hi", tree.e0_hi}, {"v0_lo", tree.v0_lo},
                 {"v0_hi", tree.v0_hi}, {"n_p", tree.n_p}};
    j["ocp"] = {{"w_f", ocp.w_f},
                {"w_u", ocp.w_u},
                {"soft_penalty_weight", ocp.soft_penalty_weight},
                {"u_min", ocp.u_min},
                {"u_max", ocp.u_max},
                {"stat_tol", ocp.stat_tol},
                {"max_iter", ocp.max_iter},
                {"terminal_height_penalty", ocp.terminal_height_penalty}};
    j["indicator"] = {{"kind", to_string(indicator.kind)},
                      {"h_min", indicator.h_min},
                      {"w_f", indicator.w_f},
                      {"w_u", indicator.w_u}};
    json fam = json::array();
    for (const auto& c : family) {
        fam.push_back({{"type", c.type == ControllerSpec::Type::ms ? "ms" : "dnn"},
                       {"eta", c.eta},
                       {"params", c.params_path},
                       {"id", c.resolved_id()}});
    }
    j["controllers"] = fam;
    return j.dump(1) + "\n";
}

std::unique_ptr<Controller> make_controller(const ControllerSpec& spec,
                                            const CampaignConfig& cfg) {
    OcpConfig ocp = cfg.ocp;
    ocp.eta = spec.eta;
    if (spec.type == ControllerSpec::Type::ms) {
        return std::make_unique<MsNmpcController>(ScenarioTree::build(cfg.tree), ocp,
                                                  cfg.kite, spec.resolved_id());
    }
    MlpParams params = load_mlp(spec.params_path);
    return std::make_unique<DnnController>(std::move(params), spec.resolved_id(),
                                           ocp.u_min, ocp.u_max);
}

namespace {

// Simulates the whole family on a fixed batch; outcome slots are written by
// scenario index, so results are independent of the worker count.
std::vector<std::vector<ScenarioOutcome>> evaluate_family(
    const CampaignConfig& cfg, const std::vector<Scenario>& batch,
    const std::string& traj_dir) {
    std::vector<std::vector<ScenarioOutcome>> outcomes(
        cfg.family.size(), std::vector<ScenarioOutcome>(batch.size()));

    for (std::size_t ci = 0; ci < cfg.family.size(); ++ci) {
        const auto& spec = cfg.family[ci];
        std::string dir;
        if (!traj_dir.empty()) {
            dir = traj_dir + "/" + spec.resolved_id();
            std::filesystem::create_directories(dir);
        }
        parallel_for(batch.size(), cfg.workers, [&](std::size_t si) {
            auto controller = make_controller(spec, cfg);
            Ekf ekf(cfg.ekf, cfg.kite);
            StateEstimator* est = cfg.sim.state_feedback ? nullptr : &ekf;
            const TrajectoryRecord rec = simulate_closed_loop(
                batch[si], *controller, est, cfg.sim, cfg.kite, cfg.wind);
            outcomes[ci][si] = outcome_from_record(rec, cfg.indicator);
            if (!dir.empty())
                save_trajectory(dir + "/scenario_" + std::to_string(si), rec,
                                batch[si].e0);
        });
    }
    return outcomes;
}

CampaignReport assemble_report(const CampaignConfig& cfg,
                               const std::vector<Scenario>& batch,
                               const std::vector<std::vector<ScenarioOutcome>>& outcomes) {
    CampaignReport rep;
    rep.n_scenarios = static_cast<int>(batch.size());
    rep.scenario_hash = batch_hash(batch);

    for (std::size_t ci = 0; ci < cfg.family.size(); ++ci) {
        const auto& spec = cfg.family[ci];
        std::vector<double> values(batch.size());
        for (std::size_t si = 0; si < batch.size(); ++si)
            values[si] = outcomes[ci][si].indicator;
        rep.vectors.emplace_back(std::move(values), spec.resolved_id());
        rep.controllers.push_back(
            summarize(spec.resolved_id(), spec.type == ControllerSpec::Type::ms ? "ms" : "dnn",
                      spec.eta, outcomes[ci]));
    }

    rep.certificate = certify_family(rep.vectors, cfg.risk, cfg.threshold);
    for (std::size_t ci = 0; ci < rep.controllers.size(); ++ci) {
        rep.controllers[ci].level = rep.certificate.levels[ci];
        rep.controllers[ci].safe = rep.certificate.safe[ci];
    }

    for (const auto& c : rep.controllers) {
        if (c.faults > cfg.degraded_fault_fraction * rep.n_scenarios)
            rep.degraded = true;
    }
    return rep;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    int n = cfg.n_override > 0 ? cfg.n_override : min_samples(cfg.risk);
    const int n_exact = exact_min_samples(cfg.risk);
    if (n < n_exact)
        throw CertificationError("run_campaign: N = " + std::to_string(n) +
                                 " is below the required minimum " +
                                 std::to_string(n_exact));

    const auto batch = scenario_batch(cfg.dist, cfg.sim, cfg.master_seed, n);

    std::string traj_dir;
    if (cfg.persist_trajectories) {
        traj_dir = cfg.output_dir + "/trajectories";
        std::filesystem::create_directories(traj_dir);
        save_scenarios_csv(cfg.output_dir + "/scenarios.csv", batch);
    }

    const auto outcomes = evaluate_family(cfg, batch, traj_dir);
    CampaignReport rep = assemble_report(cfg, batch, outcomes);

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

RobustnessReport robustness_study(const CampaignConfig& cfg,
                                  const std::vector<DistributionSpec>& alternatives) {
    cfg.validate();
    const int n = cfg.n_override > 0 ? cfg.n_override : min_samples(cfg.risk);

    RobustnessReport rep;
    for (const auto& alt : alternatives) {
        CampaignConfig acfg = cfg;
        acfg.dist = alt;
        const auto batch = scenario_batch(alt, acfg.sim, acfg.master_seed, n);
        const auto outcomes = evaluate_family(acfg, batch, "");
        for (std::size_t ci = 0; ci < acfg.family.size(); ++ci) {
            std::vector<double> values(batch.size());
            for (std::size_t si = 0; si < batch.size(); ++si)
                values[si] = outcomes[ci][si].indicator;
            RobustnessRow row;
            row.distribution = to_string(alt.family);
            row.controller_id = acfg.family[ci].resolved_id();
            row.n = n;
            row.level = generalized_max(std::span<const double>(values), cfg.risk.r);
            for (const auto& o : outcomes[ci])
                if (o.margin <= 0.0) ++row.feasible;
            rep.rows.push_back(row);
        }
    }
    return rep;
}

void emit_report(const CampaignReport& report, const CampaignConfig& cfg,
                 const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    // Controller table (CSV).
    {
        std::ostringstream csv;
        csv << "controller,type,eta,feasible,n,level,mean_thrust_kn,safe,faults\n";
        for (const auto& c : report.controllers) {
            csv << c.id << ',' << c.type << ',' << fmt_double(c.eta) << ','
                << c.feasible << ',' << report.n_scenarios << ','
                << fmt_double(c.level) << ',' << fmt_double(c.mean_thrust_n / 1000.0)
                << ',' << (c.safe ? "yes" : "no") << ',' << c.faults << '\n';
        }
        write_text_file(out_dir + "/report_controllers.csv", csv.str());
    }

    // Full-precision indicator vectors for post-hoc certificate checks.
    {
        std::ostringstream csv;
        csv << "controller,scenario_index,value\n";
        for (const auto& v : report.vectors)
            for (std::size_t i = 0; i < v.values().size(); ++i)
                csv << v.controller_id() << ',' << i << ',' << fmt_double(v.values()[i])
                    << '\n';
        write_text_file(out_dir + "/indicators.csv", csv.str());
    }

    // Certificate (JSON, lexicographically ordered keys -> deterministic bytes).
    {
        json j;
        j["risk"] = {{"epsilon", report.certificate.risk.epsilon},
                     {"delta", report.certificate.risk.delta},
                     {"r", report.certificate.risk.r},
                     {"m", report.certificate.risk.m}};
        j["n_used"] = report.certificate.n_used;
        j["threshold"] = report.certificate.threshold;
        j["scenario_hash"] = report.scenario_hash;
        j["degraded"] = report.degraded;
        json per = json::array();
        for (std::size_t i = 0; i < report.certificate.levels.size(); ++i) {
            per.push_back({{"controller", report.certificate.controller_ids[i]},
                           {"level", report.certificate.levels[i]},
                           {"safe", static_cast<bool>(report.certificate.safe[i])}});
        }
        j["controllers"] = per;
        write_text_file(out_dir + "/certificate.json", j.dump(1) + "\n");
    }

    // Markdown summary.
    {
        std::ostringstream md;
        md << "# Campaign report\n\n";
        md << "- scenarios: " << report.n_scenarios << "\n";
        md << "- scenario batch hash: " << report.scenario_hash << "\n";
        md << "- risk: epsilon=" << cfg.risk.epsilon << ", delta=" << cfg.risk.delta
           << ", r=" << cfg.risk.r << ", M=" << cfg.risk.m << "\n";
        md << "- indicator: " << to_string(cfg.indicator.kind)
           << ", threshold: " << cfg.threshold << "\n";
        if (cfg.sim.input_delay > 0)
            md << "- input delay: " << cfg.sim.input_delay << " s (delayed campaign)\n";
        md << "- degraded: " << (report.degraded ? "yes" : "no") << "\n\n";
        md << "| controller | feasible | psi(v," << cfg.risk.r
           << ") | mean thrust [kN] | safe |\n";
        md << "|---|---|---|---|---|\n";
        for (const auto& c : report.controllers) {
            char level[32], thr[32];
            std::snprintf(level, sizeof(level), "%.3f", c.level);
            std::snprintf(thr, sizeof(thr), "%.3f", c.mean_thrust_n / 1000.0);
            md << "| " << c.id << " | " << c.feasible << "/" << report.n_scenarios
               << " | " << level << " | " << thr << " | " << (c.safe ? "yes" : "no")
               << " |\n";
        }
        write_text_file(out_dir + "/report.md", md.str());
    }

    // Plots from the persisted trajectories of the first scenario, plus
    // indicator histograms.
    if (cfg.persist_trajectories) {
        for (const auto& c : report.controllers) {
            const std::string base =
                out_dir + "/trajectories/" + c.id + "/scenario_0";
            if (!std::filesystem::exists(base + ".csv")) continue;
            const auto [rec, e0] = load_trajectory(base, cfg.kite);
            (void)e0;
            PlotSeries hseries;
            hseries.name = c.id;
            for (std::size_t k = 0; k < rec.height_m.size(); ++k) {
                hseries.xs.push_back(k * cfg.sim.t_c);
                hseries.ys.push_back(rec.height_m[k]);
            }
            std::vector<PlotHLine> lines{{cfg.kite.h_min, "h_min", "#d62728"}};
            if (c.eta > 0)
                lines.push_back({cfg.kite.h_min + c.eta, "h_min + eta", "#ff7f0e"});
            svg_line_chart(out_dir + "/plots/height_" + c.id + ".svg",
                           "Height, scenario 0 (" + c.id + ")", "t [s]", "h [m]",
                           {hseries}, lines);

            PlotSeries plane;
            plane.name = c.id;
            for (const auto& s : rec.states) {
                plane.xs.push_back(s[1] * 180.0 / 3.14159265358979323846);
                plane.ys.push_back(s[0] * 180.0 / 3.14159265358979323846);
            }
            svg_line_chart(out_dir + "/plots/plane_" + c.id + ".svg",
                           "Flight path, scenario 0 (" + c.id + ")", "phi [deg]",
                           "theta [deg]", {plane});
        }
        for (std::size_t ci = 0; ci < report.vectors.size(); ++ci) {
            svg_histogram(out_dir + "/plots/indicator_hist_" +
                              report.vectors[ci].controller_id() + ".svg",
                          "Indicator distribution (" +
                              report.vectors[ci].controller_id() + ")",
                          to_string(cfg.indicator.kind), report.vectors[ci].values(),
                          30);
        }
    }
}

void emit_robustness_report(const RobustnessReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    csv << "distribution,controller,feasible,n,level\n";
    for (const auto& r : report.rows)
        csv << r.distribution << ',' << r.controller_id << ',' << r.feasible << ','
            << r.n << ',' << fmt_double(r.level) << '\n';
    write_text_file(out_dir + "/report_robustness.csv", csv.str());
}

CampaignReport report_from_persisted(const CampaignConfig& cfg,
                                     const std::string& out_dir) {
    cfg.validate();
    const int n = cfg.n_override > 0 ? cfg.n_override : min_samples(cfg.risk);

    // Recompute outcomes purely from the stored trajectories.
    std::vector<std::vector<ScenarioOutcome>> outcomes(
        cfg.family.size(), std::vector<ScenarioOutcome>(n));
    for (std::size_t ci = 0; ci < cfg.family.size(); ++ci) {
        const std::string dir =
            out_dir + "/trajectories/" + cfg.family[ci].resolved_id();
        for (int si = 0; si < n; ++si) {
            const auto [rec, e0] =
                load_trajectory(dir + "/scenario_" + std::to_string(si), cfg.kite);
            (void)e0;
            outcomes[ci][si] = outcome_from_record(rec, cfg.indicator);
        }
    }

    // The scenario batch is regenerated only for its hash (the trajectories
    // already encode its effect).
    const auto batch = scenario_batch(cfg.dist, cfg.sim, cfg.master_seed, n);
    return assemble_report(cfg, batch, outcomes);
}

}  // namespace kitecert
