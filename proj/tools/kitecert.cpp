// Command-line front end: sample-complexity queries, scenario generation,
// training-data extraction, network training, single simulations, validation
// campaigns, robustness studies and report regeneration.
//
// Exit codes: 0 success, 2 configuration error, 3 certification infeasible
// (sample count too small), 4 degraded campaign.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "kitecert/campaign.hpp"
#include "kitecert/io.hpp"
#include "kitecert/parallel.hpp"

using namespace kitecert;
using nlohmann::json;

namespace {

CampaignConfig load_config(const std::string& path, const std::string& out_override,
                           int workers_override) {
    CampaignConfig cfg = CampaignConfig::from_json_text(read_text_file(path));
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (workers_override >= 0) cfg.workers = workers_override;
    return cfg;
}

DistributionSpec named_row(const std::string& name) {
    const DistFamily f = dist_family_from_string(name);
    switch (f) {
        case DistFamily::uniform: return DistributionSpec::uniform_row();
        case DistFamily::normal: return DistributionSpec::normal_row();
        case DistFamily::beta: return DistributionSpec::beta_row();
        case DistFamily::pareto: return DistributionSpec::pareto_row();
    }
    throw std::invalid_argument("unknown distribution row: " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kitecert: probabilistic closed-loop controller validation"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    int workers_override = -1;

    // samples
    auto* samples = app.add_subcommand("samples", "print required sample counts for a risk spec");
    RiskSpec risk;
    samples->add_option("--epsilon", risk.epsilon, "violation probability")->required();
    samples->add_option("--delta", risk.delta, "confidence complement")->required();
    samples->add_option("--r", risk.r, "discarding parameter")->required();
    samples->add_option("--m", risk.m, "family cardinality")->required();

    // sample-scenarios
    auto* sample_sc = app.add_subcommand("sample-scenarios", "generate and persist a scenario batch");
    int sc_n = 0;
    sample_sc->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    sample_sc->add_option("--n", sc_n, "batch size (default: from risk spec)");
    sample_sc->add_option("--out", out_override, "output directory override");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate training data from the tree controller");
    std::string gen_kind = "opt", gen_out = "dataset";
    DatasetConfig dcfg;
    gen->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    gen->add_option("--kind", gen_kind, "opt | feas")->check(CLI::IsMember({"opt", "feas"}));
    gen->add_option("--eta", dcfg.eta, "constraint backoff [m]");
    gen->add_option("--trajectories", dcfg.n_traj, "closed loops (opt)");
    gen->add_option("--steps", dcfg.steps, "steps per loop (opt)");
    gen->add_option("--samples", dcfg.n_samples, "random states (feas)");
    gen->add_option("--seed", dcfg.seed, "dataset seed");
    gen->add_option("--out", gen_out, "output base path (writes .csv/.meta.json)");
    gen->add_option("--workers", workers_override, "worker threads (0 = all)");

    // train
    auto* train = app.add_subcommand("train", "fit a network to a dataset");
    std::string train_data, val_data, net_out = "net.json";
    Architecture arch;
    TrainConfig tcfg;
    int n_seeds = 1;
    train->add_option("--data", train_data, "training dataset base path")->required();
    train->add_option("--val", val_data, "validation dataset base path");
    train->add_option("--out", net_out, "parameter file");
    train->add_option("--hidden-layers", arch.hidden_layers);
    train->add_option("--width", arch.width);
    train->add_option("--epochs", tcfg.epochs);
    train->add_option("--batch", tcfg.batch_size);
    train->add_option("--lr", tcfg.learning_rate);
    train->add_option("--seed", tcfg.seed);
    train->add_option("--seeds", n_seeds, "train this many seeds, keep the median-val network");

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate one scenario with one controller");
    int sim_index = 0;
    std::string sim_ctrl = "ms:0", sim_out = "trajectory";
    sim->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    sim->add_option("--scenario-index", sim_index);
    sim->add_option("--controller", sim_ctrl, "ms:<eta> or dnn:<eta>:<params.json>");
    sim->add_option("--out", sim_out, "output base path");

    // validate
    auto* validate = app.add_subcommand("validate", "run the full certification campaign");
    validate->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    validate->add_option("--out", out_override, "output directory override");
    validate->add_option("--workers", workers_override, "worker threads (0 = all)");

    // robustness
    auto* robust = app.add_subcommand("robustness", "re-evaluate the family under alternative distributions");
    std::vector<std::string> alt_names{"normal", "beta", "pareto"};
    robust->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    robust->add_option("--alt", alt_names, "alternative rows");
    robust->add_option("--out", out_override, "output directory override");
    robust->add_option("--workers", workers_override, "worker threads (0 = all)");

    // report
    auto* report = app.add_subcommand("report", "regenerate the report from persisted trajectories");
    report->add_option("--from", out_override, "campaign output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (samples->parsed()) {
            const int n_bound = min_samples(risk);
            const int n_exact = exact_min_samples(risk);
            std::printf("sufficient bound : N = %d\n", n_bound);
            std::printf("exact search     : N = %d\n", n_exact);
            std::printf("binomial tail at bound N: %.6e (target delta/M = %.6e)\n",
                        binomial_tail(n_bound, risk.epsilon, risk.r - 1),
                        risk.delta / risk.m);
            return 0;
        }

        if (sample_sc->parsed()) {
            const CampaignConfig cfg = load_config(config_path, out_override, workers_override);
            const int n = sc_n > 0 ? sc_n : min_samples(cfg.risk);
            const auto batch = scenario_batch(cfg.dist, cfg.sim, cfg.master_seed, n);
            std::filesystem::create_directories(cfg.output_dir);
            save_scenarios_csv(cfg.output_dir + "/scenarios.csv", batch);
            std::printf("wrote %d scenarios to %s/scenarios.csv (hash %llu)\n", n,
                        cfg.output_dir.c_str(),
                        static_cast<unsigned long long>(batch_hash(batch)));
            return 0;
        }

        if (gen->parsed()) {
            const CampaignConfig cfg = load_config(config_path, "", workers_override);
            dcfg.kind = (gen_kind == "opt") ? DatasetKind::opt : DatasetKind::feas;
            dcfg.threads = cfg.workers;
            const Dataset ds = generate_dataset(dcfg, cfg.dist, ScenarioTree::build(cfg.tree),
                                                cfg.ocp, cfg.kite, cfg.wind, cfg.sim);
            save_dataset(gen_out, ds);
            std::printf("dataset %s: %zu pairs, %d solver faults -> %s.csv\n",
                        ds.kind.c_str(), ds.points.size(), ds.solver_faults,
                        gen_out.c_str());
            return 0;
        }

        if (train->parsed()) {
            const Dataset ds = load_dataset(train_data);
            const TabularData data = to_tabular(ds);
            TabularData val_tab;
            const TabularData* val_ptr = nullptr;
            if (!val_data.empty()) {
                val_tab = to_tabular(load_dataset(val_data));
                val_ptr = &val_tab;
            }

            // Repeat over seeds, keep the network with the median validation MSE.
            std::vector<TrainResult> runs;
            for (int s = 0; s < n_seeds; ++s) {
                TrainConfig c = tcfg;
                c.seed = tcfg.seed + static_cast<std::uint64_t>(s);
                runs.push_back(train_mlp(data, val_ptr, arch, c));
                std::printf("seed %llu: best val MSE %.6g (epoch %d)\n",
                            static_cast<unsigned long long>(c.seed),
                            runs.back().best_val_mse, runs.back().best_epoch);
            }
            std::vector<std::size_t> order(runs.size());
            for (std::size_t i = 0; i < runs.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return runs[a].best_val_mse < runs[b].best_val_mse;
            });
            const TrainResult& chosen = runs[order[order.size() / 2]];

            json meta;
            meta["dataset"] = train_data;
            meta["dataset_kind"] = ds.kind;
            meta["eta"] = ds.eta;
            meta["seed"] = tcfg.seed;
            meta["seeds"] = n_seeds;
            meta["epochs"] = tcfg.epochs;
            meta["best_val_mse"] = chosen.best_val_mse;
            meta["best_epoch"] = chosen.best_epoch;
            meta["train_curve"] = chosen.train_mse;
            meta["val_curve"] = chosen.val_mse;
            save_mlp(net_out, chosen.params, meta.dump());

            PlotSeries tr{"train", {}, {}, "#1f77b4"}, va{"validation", {}, {}, "#ff7f0e"};
            for (std::size_t e = 0; e < chosen.train_mse.size(); ++e) {
                tr.xs.push_back(static_cast<double>(e));
                tr.ys.push_back(std::log10(chosen.train_mse[e]));
                va.xs.push_back(static_cast<double>(e));
                va.ys.push_back(std::log10(chosen.val_mse[e]));
            }
            svg_line_chart(net_out + ".training.svg", "Training curve", "epoch",
                           "log10 MSE", {tr, va});
            std::printf("saved %s (median of %d seeds, best val MSE %.6g)\n",
                        net_out.c_str(), n_seeds, chosen.best_val_mse);
            return 0;
        }

        if (sim->parsed()) {
            const CampaignConfig cfg = load_config(config_path, "", workers_override);
            ControllerSpec spec;
            {
                std::stringstream ss(sim_ctrl);
                std::string type, eta, path;
                std::getline(ss, type, ':');
                std::getline(ss, eta, ':');
                std::getline(ss, path);
                spec.type = (type == "ms") ? ControllerSpec::Type::ms : ControllerSpec::Type::dnn;
                spec.eta = eta.empty() ? 0.0 : std::stod(eta);
                spec.params_path = path;
            }
            const Scenario sc = sample_scenario(cfg.dist, cfg.sim, cfg.master_seed,
                                                static_cast<std::uint64_t>(sim_index));
            auto controller = make_controller(spec, cfg);
            Ekf ekf(cfg.ekf, cfg.kite);
            StateEstimator* est = cfg.sim.state_feedback ? nullptr : &ekf;
            const TrajectoryRecord rec =
                simulate_closed_loop(sc, *controller, est, cfg.sim, cfg.kite, cfg.wind);
            save_trajectory(sim_out, rec, sc.e0);

            PlotSeries hseries{spec.resolved_id(), {}, {}, "#1f77b4"};
            for (std::size_t k = 0; k < rec.height_m.size(); ++k) {
                hseries.xs.push_back(k * cfg.sim.t_c);
                hseries.ys.push_back(rec.height_m[k]);
            }
            std::vector<PlotHLine> lines{{cfg.kite.h_min, "h_min", "#d62728"}};
            if (spec.eta > 0) lines.push_back({cfg.kite.h_min + spec.eta, "h_min + eta", "#ff7f0e"});
            svg_line_chart(sim_out + ".height.svg", "Height", "t [s]", "h [m]", {hseries}, lines);
            std::printf("trajectory %s: %s, %zu steps -> %s.csv\n", rec.scenario_id.c_str(),
                        rec.faulted ? "FAULTED" : "complete", rec.inputs.size(),
                        sim_out.c_str());
            return 0;
        }

        if (validate->parsed()) {
            const CampaignConfig cfg = load_config(config_path, out_override, workers_override);
            const CampaignReport rep = run_campaign(cfg);
            emit_report(rep, cfg, cfg.output_dir);
            write_text_file(cfg.output_dir + "/config.json", cfg.to_json_text());
            std::printf("campaign: N=%d, hash=%llu, wall=%.1fs\n", rep.n_scenarios,
                        static_cast<unsigned long long>(rep.scenario_hash),
                        rep.wall_seconds);
            for (const auto& c : rep.controllers)
                std::printf("  %-14s feasible %d/%d  level %+.4f  thrust %.1f kN  %s\n",
                            c.id.c_str(), c.feasible, rep.n_scenarios, c.level,
                            c.mean_thrust_n / 1000.0, c.safe ? "SAFE" : "not safe");
            if (rep.degraded) {
                std::fprintf(stderr, "campaign degraded: fault fraction above %.2f\n",
                             cfg.degraded_fault_fraction);
                return 4;
            }
            return 0;
        }

        if (robust->parsed()) {
            const CampaignConfig cfg = load_config(config_path, out_override, workers_override);
            std::vector<DistributionSpec> alts;
            for (const auto& name : alt_names) alts.push_back(named_row(name));
            const RobustnessReport rep = robustness_study(cfg, alts);
            emit_robustness_report(rep, cfg.output_dir);
            for (const auto& r : rep.rows)
                std::printf("  %-8s %-14s feasible %d/%d  level %+.4f\n",
                            r.distribution.c_str(), r.controller_id.c_str(), r.feasible,
                            r.n, r.level);
            return 0;
        }

        if (report->parsed()) {
            const CampaignConfig cfg = CampaignConfig::from_json_text(
                read_text_file(out_override + "/config.json"));
            const CampaignReport rep = report_from_persisted(cfg, out_override);
            emit_report(rep, cfg, out_override);
            std::printf("report regenerated from %s (N=%d)\n", out_override.c_str(),
                        rep.n_scenarios);
            return rep.degraded ? 4 : 0;
        }
    } catch (const CertificationError& e) {
        std::fprintf(stderr, "certification error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
