// Benchmarks the OpenMP-parallel kernels against the strict serial reference:
// closed-loop scenario simulation, training-data generation, and the
// order-statistics replication kernel. Prints a speedup table per thread
// count and cross-checks that every parallel result matches the serial one.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

#include "kitecert/campaign.hpp"
#include "kitecert/io.hpp"
#include "kitecert/parallel.hpp"
#include "kitecert/rng.hpp"

using namespace kitecert;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Row {
    int threads;
    double ms;
};

void print_rows(const char* name, const std::vector<Row>& rows) {
    std::printf("\n%s\n", name);
    std::printf("  threads      ms   speedup\n");
    for (const auto& r : rows)
        std::printf("  %7d %7.0f   %6.2fx\n", r.threads, r.ms, rows.front().ms / r.ms);
}

}  // namespace

int main() {
    const int hw = hardware_threads();
    std::vector<int> counts{1};
    for (int t = 2; t <= hw; t *= 2) counts.push_back(t);
    if (counts.back() != hw) counts.push_back(hw);

    // --- scenario simulation kernel (network controller + estimator) ---
    {
        const KiteParams kp;
        const WindParams wind;
        SimConfig sim;
        sim.n_sim = 200;
        const EkfConfig ecfg;
        const int n_scenarios = 48;
        const auto batch =
            scenario_batch(DistributionSpec::uniform_row(), sim, 99, n_scenarios);
        const MlpParams params = init_params(Architecture{4, 1, 3, 24}, 7);

        std::vector<double> reference;
        std::vector<Row> rows;
        for (int threads : counts) {
            std::vector<double> margins(n_scenarios);
            const double t0 = now_ms();
            parallel_for(n_scenarios, threads, [&](std::size_t i) {
                DnnController ctrl(params, "bench");
                Ekf ekf(ecfg, kp);
                const auto rec = simulate_closed_loop(batch[i], ctrl, &ekf, sim, kp, wind);
                margins[i] = height_margin(rec, IndicatorSpec{});
            });
            rows.push_back({threads, now_ms() - t0});
            if (reference.empty())
                reference = margins;
            else if (margins != reference)
                std::printf("  MISMATCH vs serial reference at %d threads!\n", threads);
        }
        print_rows("closed-loop scenario simulation (48 scenarios x 200 steps)", rows);
    }

    // --- training-data generation kernel (tree controller solves) ---
    {
        const KiteParams kp;
        const WindParams wind;
        SimConfig sim;
        TreeConfig tc;
        tc.n_p = 40;
        OcpConfig ocp;
        ocp.max_iter = 200;

        Dataset reference;
        std::vector<Row> rows;
        for (int threads : counts) {
            DatasetConfig dc;
            dc.kind = DatasetKind::opt;
            dc.n_traj = 4;
            dc.steps = 40;
            dc.eta = 2.0;
            dc.seed = 31;
            dc.threads = threads;
            const double t0 = now_ms();
            const Dataset ds = generate_dataset(dc, DistributionSpec::uniform_row(),
                                                ScenarioTree::build(tc), ocp, kp, wind,
                                                sim);
            rows.push_back({threads, now_ms() - t0});
            if (reference.points.empty()) {
                reference = ds;
            } else {
                bool same = ds.points.size() == reference.points.size();
                for (std::size_t i = 0; same && i < ds.points.size(); ++i)
                    same = ds.points[i].u_target == reference.points[i].u_target;
                if (!same) std::printf("  MISMATCH vs serial reference at %d threads!\n",
                                       threads);
            }
        }
        print_rows("training-data generation (4 rollouts x 40 tree solves)", rows);
    }

    // --- order-statistics replication kernel ---
    {
        const int replications = 200000;
        long reference = -1;
        std::vector<Row> rows;
        for (int threads : counts) {
            std::vector<std::uint8_t> flags(replications);
            const double t0 = now_ms();
            parallel_for(replications, threads, [&](std::size_t i) {
                RandomStream rs(4242, i, 1);
                double draws[50];
                for (int k = 0; k < 50; ++k) draws[k] = rs.next_unit();
                std::nth_element(draws, draws + 2, draws + 50, std::greater<double>());
                flags[i] = (1.0 - draws[2]) > 0.1 ? 1 : 0;
            });
            long count = 0;
            for (auto f : flags) count += f;
            rows.push_back({threads, now_ms() - t0});
            if (reference < 0)
                reference = count;
            else if (count != reference)
                std::printf("  MISMATCH vs serial reference at %d threads!\n", threads);
        }
        print_rows("coverage replication kernel (2e5 replications)", rows);
    }

    return 0;
}
