#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "kitecert/campaign.hpp"
#include "kitecert/io.hpp"

using namespace kitecert;
namespace fs = std::filesystem;

namespace {

// A tiny network that realizes a constant feedback (zero weights, output bias).
std::string write_constant_net(const fs::path& dir, const std::string& name, double u) {
    MlpParams p = init_params(Architecture{4, 1, 1, 4}, 1);
    for (auto& w : p.weights)
        for (auto& v : w) v = 0.0;
    p.biases.back() = {u};
    const std::string path = (dir / name).string();
    save_mlp(path, p);
    return path;
}

CampaignConfig desk_config(const fs::path& dir) {
    CampaignConfig cfg;
    cfg.master_seed = 2024;
    cfg.output_dir = (dir / "out").string();
    cfg.workers = 1;
    cfg.risk = RiskSpec{0.3, 0.1, 1, 2};
    cfg.sim.n_sim = 30;
    cfg.family = {
        ControllerSpec{ControllerSpec::Type::dnn, 0.0, write_constant_net(dir, "zero.json", 0.0), "hold"},
        ControllerSpec{ControllerSpec::Type::dnn, 4.0, write_constant_net(dir, "turn.json", 1.5), "turn"},
    };
    return cfg;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("kitecert_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("campaign runs end to end and its artifacts round-trip byte-identically") {
    const fs::path dir = fresh_dir("campaign");
    const CampaignConfig cfg = desk_config(dir);

    const CampaignReport rep = run_campaign(cfg);
    CHECK(rep.n_scenarios == 10);  // ceil(ln(M/delta)/epsilon) for (0.3, 0.1, r=1, M=2)
    REQUIRE(rep.controllers.size() == 2);
    REQUIRE(rep.vectors.size() == 2);
    CHECK(rep.vectors[0].size() == 10);
    CHECK(rep.certificate.n_used == 10);
    for (const auto& c : rep.controllers) {
        CHECK(c.feasible >= 0);
        CHECK(c.feasible <= rep.n_scenarios);
    }

    emit_report(rep, cfg, cfg.output_dir);
    const std::string table1 = read_text_file(cfg.output_dir + "/report_controllers.csv");
    const std::string cert1 = read_text_file(cfg.output_dir + "/certificate.json");
    const std::string ind1 = read_text_file(cfg.output_dir + "/indicators.csv");

    // Rebuild purely from the persisted trajectories.
    const CampaignReport rep2 = report_from_persisted(cfg, cfg.output_dir);
    CHECK(rep2.scenario_hash == rep.scenario_hash);
    for (std::size_t i = 0; i < rep.vectors.size(); ++i)
        CHECK(rep2.vectors[i].values() == rep.vectors[i].values());

    const std::string dir2 = (dir / "out2").string();
    emit_report(rep2, cfg, dir2);
    CHECK(read_text_file(dir2 + "/report_controllers.csv") == table1);
    CHECK(read_text_file(dir2 + "/certificate.json") == cert1);
    CHECK(read_text_file(dir2 + "/indicators.csv") == ind1);

    // Certificate consistency: recompute from the persisted indicator vectors.
    const Certificate again = certify_family(rep2.vectors, cfg.risk, cfg.threshold);
    for (std::size_t i = 0; i < again.levels.size(); ++i) {
        CHECK(again.levels[i] == rep.certificate.levels[i]);
        CHECK(again.safe[i] == rep.certificate.safe[i]);
    }
    fs::remove_all(dir);
}

TEST_CASE("scenario hash is shared across controllers and seeds change it") {
    const fs::path dir = fresh_dir("hash");
    CampaignConfig cfg = desk_config(dir);
    cfg.persist_trajectories = false;
    const CampaignReport rep = run_campaign(cfg);

    CampaignConfig other = cfg;
    other.master_seed = 999;
    const CampaignReport rep_other = run_campaign(other);
    CHECK(rep.scenario_hash != rep_other.scenario_hash);
    fs::remove_all(dir);
}

TEST_CASE("sample count overrides below the binomial requirement are rejected") {
    const fs::path dir = fresh_dir("override");
    CampaignConfig cfg = desk_config(dir);
    cfg.n_override = 3;  // far below the requirement
    CHECK_THROWS_AS(run_campaign(cfg), CertificationError);
    fs::remove_all(dir);
}

TEST_CASE("config json round trip") {
    const fs::path dir = fresh_dir("json");
    const CampaignConfig cfg = desk_config(dir);
    const std::string text = cfg.to_json_text();
    const CampaignConfig parsed = CampaignConfig::from_json_text(text);
    CHECK(parsed.to_json_text() == text);
    CHECK(parsed.risk.epsilon == cfg.risk.epsilon);
    CHECK(parsed.family.size() == cfg.family.size());
    CHECK(parsed.family[1].eta == 4.0);
    fs::remove_all(dir);
}

TEST_CASE("config errors are invalid_argument (CLI exit code 2)") {
    CHECK_THROWS_AS(CampaignConfig::from_json_text("{not json"), std::invalid_argument);
    CHECK_THROWS_AS(CampaignConfig::from_json_text(
                        R"({"controllers":[{"type":"warp","eta":1}]})"),
                    std::invalid_argument);
    // family size vs M mismatch
    CHECK_THROWS_AS(CampaignConfig::from_json_text(
                        R"({"risk":{"epsilon":0.1,"delta":0.01,"r":1,"m":3},
                            "controllers":[{"type":"ms","eta":0}]})"),
                    std::invalid_argument);
}

TEST_CASE("robustness study with the identical distribution reproduces the campaign") {
    const fs::path dir = fresh_dir("robust");
    CampaignConfig cfg = desk_config(dir);
    cfg.persist_trajectories = false;
    const CampaignReport rep = run_campaign(cfg);

    const RobustnessReport rob = robustness_study(cfg, {cfg.dist});
    REQUIRE(rob.rows.size() == 2);
    for (std::size_t i = 0; i < rob.rows.size(); ++i) {
        CHECK(rob.rows[i].level == rep.certificate.levels[i]);
        CHECK(rob.rows[i].feasible == rep.controllers[i].feasible);
        CHECK(rob.rows[i].n == rep.n_scenarios);
    }
    fs::remove_all(dir);
}

TEST_CASE("benchmark rows: the bounded alternative stays inside the baseline support") {
    const auto uni = DistributionSpec::uniform_row();
    const auto beta = DistributionSpec::beta_row();
    // scaled Beta support is [offset, offset + scaling] for positive scaling,
    // [offset + scaling, offset] otherwise
    auto support = [](const VariablePair& p) {
        return std::pair<double, double>{std::min(p.b, p.b + p.a),
                                         std::max(p.b, p.b + p.a)};
    };
    const std::pair<const VariablePair*, const VariablePair*> vars[] = {
        {&beta.theta0_deg, &uni.theta0_deg},
        {&beta.phi0_deg, &uni.phi0_deg},
        {&beta.psi0_deg, &uni.psi0_deg},
        {&beta.e0, &uni.e0},
        {&beta.v_m, &uni.v_m},
    };
    for (const auto& [b, u] : vars) {
        const auto [lo, hi] = support(*b);
        CHECK(lo >= u->a);
        CHECK(hi <= u->b);
    }
}

TEST_CASE("trajectory persistence: save, load, verify the cached columns") {
    const fs::path dir = fresh_dir("traj");
    const CampaignConfig cfg = desk_config(dir);
    auto ctrl = make_controller(cfg.family[0], cfg);
    const Scenario sc = sample_scenario(cfg.dist, cfg.sim, 1, 0);
    Ekf ekf(cfg.ekf, cfg.kite);
    const auto rec = simulate_closed_loop(sc, *ctrl, &ekf, cfg.sim, cfg.kite, cfg.wind);

    const std::string base = (dir / "t0").string();
    save_trajectory(base, rec, sc.e0);
    const auto [loaded, e0] = load_trajectory(base, cfg.kite);
    CHECK(e0 == sc.e0);
    CHECK(loaded.states.size() == rec.states.size());
    CHECK(loaded.inputs == rec.inputs);
    CHECK(loaded.height_m == rec.height_m);
    CHECK(loaded.scenario_id == rec.scenario_id);

    // Corrupt one cached height digit; the loader must notice.
    {
        std::string text = read_text_file(base + ".csv");
        const auto hpos = text.find("height");
        REQUIRE(hpos != std::string::npos);
        // change the first data row's height field by replacing its first digit
        auto row_start = text.find('\n', hpos) + 1;
        std::vector<std::string::size_type> commas;
        for (auto i = row_start; i < text.size() && text[i] != '\n'; ++i)
            if (text[i] == ',') commas.push_back(i);
        REQUIRE(commas.size() >= 13);
        const auto hfield = commas[11] + 1;
        text[hfield] = (text[hfield] == '9') ? '8' : '9';
        write_text_file(base + ".csv", text);
        CHECK_THROWS_AS(load_trajectory(base, cfg.kite), std::runtime_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("dataset persistence round trip") {
    const fs::path dir = fresh_dir("dataset");
    Dataset ds;
    ds.kind = "feas";
    ds.eta = 4.0;
    ds.seed = 17;
    ds.solver_faults = 2;
    ds.points = {{0.5, 0.1, -0.2, 1.0, 2.5}, {0.6, -0.1, 0.3, -1.0, -2.5}};
    const std::string base = (dir / "ds").string();
    save_dataset(base, ds);
    const Dataset in = load_dataset(base);
    CHECK(in.kind == ds.kind);
    CHECK(in.eta == ds.eta);
    CHECK(in.solver_faults == 2);
    REQUIRE(in.points.size() == 2);
    CHECK(in.points[1].u_target == -2.5);
    const TabularData t = to_tabular(in);
    CHECK(t.size() == 2);
    CHECK(t.x[4 * 1 + 3] == -1.0);
    fs::remove_all(dir);
}
