#include "kitecert/scenario.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "kitecert/rng.hpp"

namespace kitecert {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Stream tags: one independent stream per scenario component.
enum Tag : std::uint64_t {
    kTheta0 = 1,
    kPhi0 = 2,
    kPsi0 = 3,
    kE0 = 4,
    kVm = 5,
    kPv0 = 6,
    kWtb = 7,
    kMeasNoise = 8,
    kInitDeltas = 9,
};

double draw_variable(const DistributionSpec& spec, const VariablePair& pair,
                     RandomStream& rs) {
    switch (spec.family) {
        case DistFamily::uniform:
            return rs.uniform(pair.a, pair.b);
        case DistFamily::normal:
            return rs.normal(pair.a, pair.b);
        case DistFamily::beta:
            return pair.a * rs.beta_int(2, 5) + pair.b;
        case DistFamily::pareto:
            return rs.pareto(pair.a) + pair.b;
    }
    throw std::logic_error("draw_variable: unknown family");
}

}  // namespace

int SimConfig::ekf_per_control() const {
    return static_cast<int>(std::llround(t_c / t_ekf));
}

void SimConfig::validate() const {
    if (t_c <= 0 || t_ekf <= 0 || substep <= 0)
        throw std::invalid_argument("SimConfig: periods must be positive");
    if (n_sim < 1) throw std::invalid_argument("SimConfig: n_sim must be >= 1");
    const double kc = t_c / t_ekf;
    if (std::abs(kc - std::llround(kc)) > 1e-9)
        throw std::invalid_argument("SimConfig: t_c must be an integer multiple of t_ekf");
    const double ks = t_ekf / substep;
    if (std::abs(ks - std::llround(ks)) > 1e-9)
        throw std::invalid_argument("SimConfig: t_ekf must be an integer multiple of substep");
    if (input_delay < 0 || input_delay >= t_c)
        throw std::invalid_argument("SimConfig: input_delay must be in [0, t_c)");
}

DistFamily dist_family_from_string(const std::string& s) {
    if (s == "uniform") return DistFamily::uniform;
    if (s == "normal") return DistFamily::normal;
    if (s == "beta") return DistFamily::beta;
    if (s == "pareto") return DistFamily::pareto;
    throw std::invalid_argument("unknown distribution family: " + s);
}

std::string to_string(DistFamily f) {
    switch (f) {
        case DistFamily::uniform: return "uniform";
        case DistFamily::normal: return "normal";
        case DistFamily::beta: return "beta";
        case DistFamily::pareto: return "pareto";
    }
    return "?";
}

DistributionSpec DistributionSpec::uniform_row() {
    return DistributionSpec{DistFamily::uniform,
                            {28.0, 30.0}, {-10.0, 10.0}, {-2.0, 2.0},
                            {4.0, 6.0}, {7.0, 9.0}};
}

DistributionSpec DistributionSpec::normal_row() {
    return DistributionSpec{DistFamily::normal,
                            {29.0, 0.35}, {0.0, 3.5}, {0.0, 0.7},
                            {5.0, 0.35}, {8.0, 0.35}};
}

DistributionSpec DistributionSpec::beta_row() {
    return DistributionSpec{DistFamily::beta,
                            {2.0, 28.0}, {20.0, -10.0}, {4.0, -2.0},
                            {2.0, 4.0}, {2.0, 7.0}};
}

DistributionSpec DistributionSpec::pareto_row() {
    return DistributionSpec{DistFamily::pareto,
                            {5.0, 28.0}, {5.0, -10.0}, {5.0, 2.0},
                            {5.0, 4.5}, {5.0, 7.5}};
}

void DistributionSpec::validate() const {
    const VariablePair all[] = {theta0_deg, phi0_deg, psi0_deg, e0, v_m};
    for (const auto& p : all) {
        switch (family) {
            case DistFamily::uniform:
                if (!(p.a < p.b))
                    throw std::invalid_argument("DistributionSpec: uniform requires a < b");
                break;
            case DistFamily::normal:
                if (!(p.b > 0))
                    throw std::invalid_argument("DistributionSpec: normal requires sigma > 0");
                break;
            case DistFamily::beta:
                if (p.a == 0.0)
                    throw std::invalid_argument("DistributionSpec: beta scaling must be nonzero");
                break;
            case DistFamily::pareto:
                if (!(p.a > 0))
                    throw std::invalid_argument("DistributionSpec: pareto tail index must be positive");
                break;
        }
    }
}

std::string Scenario::id() const {
    return "s" + std::to_string(master_seed) + "_" + std::to_string(index);
}

Scenario sample_scenario(const DistributionSpec& spec, const SimConfig& cfg,
                         std::uint64_t master_seed, std::uint64_t index) {
    spec.validate();
    cfg.validate();

    Scenario sc;
    sc.master_seed = master_seed;
    sc.index = index;

    {
        RandomStream rs(master_seed, index, kTheta0);
        sc.x0.theta = draw_variable(spec, spec.theta0_deg, rs) * kDegToRad;
    }
    {
        RandomStream rs(master_seed, index, kPhi0);
        sc.x0.phi = draw_variable(spec, spec.phi0_deg, rs) * kDegToRad;
    }
    {
        RandomStream rs(master_seed, index, kPsi0);
        sc.x0.psi = draw_variable(spec, spec.psi0_deg, rs) * kDegToRad;
    }
    {
        RandomStream rs(master_seed, index, kE0);
        sc.e0 = draw_variable(spec, spec.e0, rs);
    }
    {
        RandomStream rs(master_seed, index, kVm);
        sc.v_m = draw_variable(spec, spec.v_m, rs);
    }
    {
        RandomStream rs(master_seed, index, kPv0);
        sc.p_v0 = rs.normal(0.0, 0.25);
    }
    {
        RandomStream rs(master_seed, index, kWtb);
        sc.w_tb.resize(cfg.n_sim);
        for (auto& w : sc.w_tb) w = rs.normal(0.0, 0.25);
    }
    {
        RandomStream rs(master_seed, index, kMeasNoise);
        sc.meas_noise.resize(cfg.ekf_steps_total());
        for (auto& m : sc.meas_noise) {
            m[0] = rs.normal(0.0, 0.01);
            m[1] = rs.normal(0.0, 0.01);
            m[2] = rs.normal(0.0, 0.05);
        }
    }
    {
        RandomStream rs(master_seed, index, kInitDeltas);
        for (auto& d : sc.init_deltas) d = rs.normal(1.0, 0.05);
    }
    return sc;
}

std::vector<Scenario> scenario_batch(const DistributionSpec& spec, const SimConfig& cfg,
                                     std::uint64_t master_seed, std::size_t n) {
    if (n < 1) throw std::invalid_argument("scenario_batch: n must be >= 1");
    std::vector<Scenario> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(sample_scenario(spec, cfg, master_seed, i));
    return out;
}

std::uint64_t batch_hash(const std::vector<Scenario>& batch) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    for (const auto& sc : batch) {
        feed(sc.x0.theta);
        feed(sc.x0.phi);
        feed(sc.x0.psi);
        feed(sc.e0);
        feed(sc.v_m);
        feed(sc.p_v0);
        feed(sc.u_prev0);
        for (double d : sc.init_deltas) feed(d);
        for (double w : sc.w_tb) feed(w);
        for (const auto& m : sc.meas_noise) {
            feed(m[0]);
            feed(m[1]);
            feed(m[2]);
        }
    }
    return h;
}

}  // namespace kitecert
