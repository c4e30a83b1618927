#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "kitecert/mlp.hpp"
#include "kitecert/rng.hpp"

using namespace kitecert;

namespace {

// Independent reference evaluation, recursively from the output layer.
double reference_eval(const MlpParams& p, const std::vector<double>& x, int layer,
                      int unit) {
    const int nin = (layer == 0) ? p.arch.n_in : p.arch.width;
    double acc = p.biases[layer][unit];
    for (int c = 0; c < nin; ++c) {
        const double in =
            (layer == 0) ? x[c] : std::tanh(reference_eval(p, x, layer - 1, c));
        acc += p.weights[layer][static_cast<std::size_t>(unit) * nin + c] * in;
    }
    return acc;
}

TabularData make_tabular(int n, int n_in, int n_out, std::uint64_t seed) {
    TabularData d;
    d.n_in = n_in;
    d.n_out = n_out;
    RandomStream rs(seed, 0, 1);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < n_in; ++c) d.x.push_back(rs.uniform(-2, 2));
        for (int c = 0; c < n_out; ++c) d.y.push_back(rs.uniform(-1, 1));
    }
    return d;
}

double spectral_norm(const std::vector<double>& w, int rows, int cols) {
    std::vector<double> v(cols, 1.0 / std::sqrt(double(cols))), u(rows);
    for (int it = 0; it < 200; ++it) {
        for (int r = 0; r < rows; ++r) {
            u[r] = 0;
            for (int c = 0; c < cols; ++c) u[r] += w[std::size_t(r) * cols + c] * v[c];
        }
        double un = 0;
        for (double x : u) un += x * x;
        un = std::sqrt(un);
        if (un == 0) return 0;
        for (auto& x : u) x /= un;
        for (int c = 0; c < cols; ++c) {
            v[c] = 0;
            for (int r = 0; r < rows; ++r) v[c] += w[std::size_t(r) * cols + c] * u[r];
        }
        double vn = 0;
        for (double x : v) vn += x * x;
        vn = std::sqrt(vn);
        if (vn == 0) return 0;
        for (auto& x : v) x /= vn;
    }
    double s = 0;
    for (int r = 0; r < rows; ++r) {
        double acc = 0;
        for (int c = 0; c < cols; ++c) acc += w[std::size_t(r) * cols + c] * v[c];
        s += acc * acc;
    }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("complexity formulas") {
    CHECK(count_weights(3, 1, 6, 30) == 4803);
    CHECK(count_neurons(Architecture{3, 1, 6, 30}) == 180);
    CHECK(count_weights(1, 1, 1, 1) == 4);
    CHECK(count_neurons(Architecture{1, 1, 1, 2}) == 2);
    CHECK(count_neurons(Architecture{1, 1, 1, 4}) == 4);
}

TEST_CASE("allocated parameter count vs the closed-form enumeration") {
    for (const Architecture arch : {Architecture{3, 1, 6, 30}, Architecture{4, 1, 3, 24},
                                    Architecture{2, 2, 1, 7}}) {
        const MlpParams p = init_params(arch, 1);
        const long expected =
            static_cast<long>(arch.n_in + 1) * arch.width +
            static_cast<long>(arch.hidden_layers - 1) * (arch.width + 1) * arch.width +
            static_cast<long>(arch.width + 1) * arch.n_out;
        CHECK(parameter_count(p) == expected);
    }
    // The conventional complexity count and the allocation differ by design.
    const MlpParams p = init_params(Architecture{3, 1, 6, 30}, 1);
    CHECK(parameter_count(p) == 4801);
}

TEST_CASE("forward: zero parameters give zero output") {
    MlpParams p = init_params(Architecture{3, 1, 2, 8}, 3);
    for (auto& w : p.weights)
        for (auto& v : w) v = 0.0;
    const auto y = forward(p, std::vector<double>{1.0, -2.0, 0.5});
    CHECK(y[0] == 0.0);
}

TEST_CASE("forward: single unit network is tanh") {
    MlpParams p = init_params(Architecture{1, 1, 1, 1}, 3);
    p.weights[0] = {1.0};
    p.weights[1] = {1.0};
    p.biases[0] = {0.0};
    p.biases[1] = {0.0};
    for (double x : {-2.0, -0.3, 0.0, 1.7})
        CHECK(forward(p, std::vector<double>{x})[0] == doctest::Approx(std::tanh(x)).epsilon(1e-15));
}

TEST_CASE("forward matches an independent recursive evaluation") {
    RandomStream rs(21, 0, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const Architecture arch{2 + int(rs.next_u64() % 3), 1 + int(rs.next_u64() % 2),
                                1 + int(rs.next_u64() % 3), 2 + int(rs.next_u64() % 6)};
        const MlpParams p = init_params(arch, rs.next_u64());
        std::vector<double> x(arch.n_in);
        for (auto& v : x) v = rs.uniform(-2, 2);
        const auto y = forward(p, x);
        for (int r = 0; r < arch.n_out; ++r)
            CHECK(y[r] ==
                  doctest::Approx(reference_eval(p, x, arch.hidden_layers, r)).epsilon(1e-12));
    }
}

TEST_CASE("backpropagation matches central finite differences") {
    RandomStream rs(33, 0, 3);
    for (int trial = 0; trial < 6; ++trial) {
        const Architecture arch{1 + int(rs.next_u64() % 3), 1, 1 + int(rs.next_u64() % 3),
                                2 + int(rs.next_u64() % 5)};
        MlpParams p = init_params(arch, rs.next_u64());
        const TabularData data = make_tabular(7, arch.n_in, arch.n_out, rs.next_u64());

        MlpGrads g;
        const double f0 = mse_loss_gradient(p, data, g);
        CHECK(f0 == doctest::Approx(mse_loss(p, data)).epsilon(1e-12));

        double worst_rel = 0.0;
        for (std::size_t l = 0; l < p.weights.size(); ++l) {
            auto check_block = [&](std::vector<double>& theta, const std::vector<double>& grad) {
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    const double h = 1e-6;
                    const double save = theta[i];
                    theta[i] = save + h;
                    const double fp = mse_loss(p, data);
                    theta[i] = save - h;
                    const double fm = mse_loss(p, data);
                    theta[i] = save;
                    const double fd = (fp - fm) / (2 * h);
                    worst_rel = std::max(worst_rel, std::abs(fd - grad[i]) /
                                                        std::max(1e-6, std::abs(fd)));
                }
            };
            check_block(p.weights[l], g.weights[l]);
            check_block(p.biases[l], g.biases[l]);
        }
        CHECK(worst_rel < 1e-5);
    }
}

TEST_CASE("training memorizes a small sample") {
    const TabularData data = make_tabular(10, 3, 1, 44);
    Architecture arch{3, 1, 2, 20};
    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 10;
    cfg.epochs = 2000;
    cfg.seed = 9;
    const TrainResult res = train_mlp(data, &data, arch, cfg);
    CHECK(evaluate_mse(res.params, data) < 1e-4);
}

TEST_CASE("best-so-far training loss bookkeeping is monotone") {
    const TabularData data = make_tabular(64, 4, 1, 45);
    Architecture arch{4, 1, 2, 10};
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.seed = 2;
    const TrainResult res = train_mlp(data, nullptr, arch, cfg);
    REQUIRE(res.best_train_so_far.size() == 40);
    for (std::size_t e = 1; e < res.best_train_so_far.size(); ++e) {
        CHECK(res.best_train_so_far[e] <= res.best_train_so_far[e - 1]);
        CHECK(res.best_train_so_far[e] <= res.train_mse[e]);
    }
    CHECK(res.best_epoch >= 0);
    CHECK(res.best_val_mse == doctest::Approx(res.val_mse[res.best_epoch]));
}

TEST_CASE("training throws on empty or mismatched data") {
    TabularData empty;
    empty.n_in = 4;
    empty.n_out = 1;
    CHECK_THROWS_AS(train_mlp(empty, nullptr, Architecture{4, 1, 1, 4}, TrainConfig{}),
                    std::invalid_argument);
    const TabularData data = make_tabular(16, 3, 1, 46);
    CHECK_THROWS_AS(train_mlp(data, nullptr, Architecture{4, 1, 1, 4}, TrainConfig{}),
                    std::invalid_argument);
}

TEST_CASE("network feedback law clips to the actuator box and is deterministic") {
    Architecture arch{4, 1, 2, 12};
    MlpParams p = init_params(arch, 4);
    // Blow up the output layer so the raw output exceeds the box.
    for (auto& v : p.weights[arch.hidden_layers]) v *= 1e4;
    DnnController ctrl(p, "net");
    const std::array<double, 5> x{0.5, 0.1, -0.2, 5.0, 8.0};
    const double u1 = ctrl.compute(x, 0.3);
    const double u2 = ctrl.compute(x, 0.3);
    CHECK(u1 == u2);
    CHECK(u1 >= -10.0);
    CHECK(u1 <= 10.0);
    CHECK(std::abs(u1) == 10.0);  // saturated by construction
}

TEST_CASE("forward is Lipschitz with the product of spectral norms") {
    RandomStream rs(55, 0, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const Architecture arch{3, 1, 2, 8};
        const MlpParams p = init_params(arch, rs.next_u64());
        double bound = 1.0;
        for (int l = 0; l <= arch.hidden_layers; ++l) {
            const int nin = (l == 0) ? arch.n_in : arch.width;
            const int nout = (l == arch.hidden_layers) ? arch.n_out : arch.width;
            bound *= spectral_norm(p.weights[l], nout, nin);
        }
        for (int probe = 0; probe < 50; ++probe) {
            std::vector<double> x(arch.n_in), d(arch.n_in);
            double dn = 0;
            for (int c = 0; c < arch.n_in; ++c) {
                x[c] = rs.uniform(-2, 2);
                d[c] = rs.uniform(-1, 1);
                dn += d[c] * d[c];
            }
            dn = std::sqrt(dn);
            std::vector<double> xp(arch.n_in);
            for (int c = 0; c < arch.n_in; ++c) xp[c] = x[c] + d[c];
            const double dy = std::abs(forward(p, xp)[0] - forward(p, x)[0]);
            CHECK(dy <= bound * dn * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("parameter container round-trips exactly") {
    const Architecture arch{4, 1, 3, 9};
    MlpParams p = init_params(arch, 77);
    p.standardizer.in_mean = {0.1, -0.2, 0.3, 0.0};
    p.standardizer.in_scale = {1.0, 2.0, 0.5, 1.5};
    p.standardizer.out_mean = -0.7;
    p.standardizer.out_scale = 3.3;

    const std::string path = (std::filesystem::temp_directory_path() /
                              "kitecert_mlp_roundtrip.json").string();
    save_mlp(path, p, R"({"note":"fixture"})");
    const MlpParams q = load_mlp(path);
    CHECK(q.weights == p.weights);
    CHECK(q.biases == p.biases);
    CHECK(q.standardizer.in_mean == p.standardizer.in_mean);
    CHECK(q.standardizer.out_scale == p.standardizer.out_scale);
    CHECK(load_mlp_metadata(path).find("fixture") != std::string::npos);
    std::filesystem::remove(path);
}
