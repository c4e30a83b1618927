#include "kitecert/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "kitecert/rng.hpp"

namespace kitecert {

namespace {

using nlohmann::json;

// Dimensions of layer l = 0..L (L hidden + linear output).
int layer_in(const Architecture& a, int l) { return l == 0 ? a.n_in : a.width; }
int layer_out(const Architecture& a, int l) {
    return l == a.hidden_layers ? a.n_out : a.width;
}

struct Workspace {
    std::vector<std::vector<double>> act;    // act[l], l = 0..L+1
    std::vector<std::vector<double>> delta;  // delta[l] over pre-activations

    explicit Workspace(const Architecture& a) {
        act.resize(a.hidden_layers + 2);
        delta.resize(a.hidden_layers + 1);
        act[0].resize(a.n_in);
        for (int l = 0; l <= a.hidden_layers; ++l) {
            act[l + 1].resize(layer_out(a, l));
            delta[l].resize(layer_out(a, l));
        }
    }
};

void forward_ws(const MlpParams& p, std::span<const double> x, Workspace& ws) {
    const auto& a = p.arch;
    std::copy(x.begin(), x.end(), ws.act[0].begin());
    for (int l = 0; l <= a.hidden_layers; ++l) {
        const int nin = layer_in(a, l);
        const int nout = layer_out(a, l);
        const auto& w = p.weights[l];
        const auto& b = p.biases[l];
        const auto& in = ws.act[l];
        auto& out = ws.act[l + 1];
        for (int r = 0; r < nout; ++r) {
            double acc = b[r];
            const double* wr = w.data() + static_cast<std::size_t>(r) * nin;
            for (int c = 0; c < nin; ++c) acc += wr[c] * in[c];
            out[r] = (l < a.hidden_layers) ? std::tanh(acc) : acc;
        }
    }
}

void accumulate_backward(const MlpParams& p, std::span<const double> target,
                         double sample_weight, Workspace& ws, MlpGrads& g) {
    const auto& a = p.arch;
    const int last = a.hidden_layers;

    // Output layer is linear: d(loss)/d(pre) = 2 (y - t) * weight.
    for (int r = 0; r < a.n_out; ++r)
        ws.delta[last][r] = 2.0 * (ws.act[last + 1][r] - target[r]) * sample_weight;

    for (int l = last; l >= 0; --l) {
        const int nin = layer_in(a, l);
        const int nout = layer_out(a, l);
        const auto& in = ws.act[l];
        auto& gw = g.weights[l];
        auto& gb = g.biases[l];
        for (int r = 0; r < nout; ++r) {
            const double d = ws.delta[l][r];
            gb[r] += d;
            double* gwr = gw.data() + static_cast<std::size_t>(r) * nin;
            for (int c = 0; c < nin; ++c) gwr[c] += d * in[c];
        }
        if (l > 0) {
            const auto& w = p.weights[l];
            auto& prev = ws.delta[l - 1];
            for (int c = 0; c < nin; ++c) {
                double acc = 0.0;
                for (int r = 0; r < nout; ++r)
                    acc += w[static_cast<std::size_t>(r) * nin + c] * ws.delta[l][r];
                const double act = ws.act[l][c];
                prev[c] = acc * (1.0 - act * act);
            }
        }
    }
}

MlpGrads zero_grads(const MlpParams& p) {
    MlpGrads g;
    g.weights.resize(p.weights.size());
    g.biases.resize(p.biases.size());
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        g.weights[l].assign(p.weights[l].size(), 0.0);
        g.biases[l].assign(p.biases[l].size(), 0.0);
    }
    return g;
}

Standardizer fit_standardizer(const TabularData& d) {
    const std::size_t n = d.size();
    Standardizer s;
    s.in_mean.assign(d.n_in, 0.0);
    s.in_scale.assign(d.n_in, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < d.n_in; ++c) s.in_mean[c] += d.x[i * d.n_in + c];
    for (auto& m : s.in_mean) m /= static_cast<double>(n);
    std::vector<double> var(d.n_in, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < d.n_in; ++c) {
            const double dv = d.x[i * d.n_in + c] - s.in_mean[c];
            var[c] += dv * dv;
        }
    for (int c = 0; c < d.n_in; ++c)
        s.in_scale[c] = std::max(std::sqrt(var[c] / static_cast<double>(n)), 1e-12);

    double ym = 0.0;
    for (std::size_t i = 0; i < n * d.n_out; ++i) ym += d.y[i];
    ym /= static_cast<double>(n * d.n_out);
    double yv = 0.0;
    for (std::size_t i = 0; i < n * d.n_out; ++i) {
        const double dv = d.y[i] - ym;
        yv += dv * dv;
    }
    s.out_mean = ym;
    s.out_scale = std::max(std::sqrt(yv / static_cast<double>(n * d.n_out)), 1e-12);
    return s;
}

TabularData standardize(const TabularData& d, const Standardizer& s) {
    TabularData out = d;
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < d.n_in; ++c)
            out.x[i * d.n_in + c] = (d.x[i * d.n_in + c] - s.in_mean[c]) / s.in_scale[c];
    for (auto& y : out.y) y = (y - s.out_mean) / s.out_scale;
    return out;
}

}  // namespace

void Architecture::validate() const {
    if (n_in < 1 || n_out < 1 || hidden_layers < 1 || width < 1)
        throw std::invalid_argument("Architecture: all dimensions must be >= 1");
}

long count_weights(int n_x, int n_u, int layers, int width) {
    return static_cast<long>(n_x) * (width + 1) +
           static_cast<long>(layers - 1) * (width + 1) * width +
           static_cast<long>(width) * (n_u + 1);
}

long count_weights(const Architecture& arch) {
    return count_weights(arch.n_in, arch.n_out, arch.hidden_layers, arch.width);
}

long count_neurons(const Architecture& arch) {
    return static_cast<long>(arch.hidden_layers) * arch.width;
}

void Standardizer::apply_in(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (x[i] - in_mean[i]) / in_scale[i];
}

void MlpParams::validate() const {
    arch.validate();
    if (static_cast<int>(weights.size()) != arch.hidden_layers + 1 ||
        static_cast<int>(biases.size()) != arch.hidden_layers + 1)
        throw std::invalid_argument("MlpParams: layer count mismatch");
    for (int l = 0; l <= arch.hidden_layers; ++l) {
        if (static_cast<int>(weights[l].size()) != layer_in(arch, l) * layer_out(arch, l) ||
            static_cast<int>(biases[l].size()) != layer_out(arch, l))
            throw std::invalid_argument("MlpParams: shape mismatch at layer " +
                                        std::to_string(l));
        for (double v : weights[l])
            if (!std::isfinite(v)) throw std::invalid_argument("MlpParams: non-finite weight");
        for (double v : biases[l])
            if (!std::isfinite(v)) throw std::invalid_argument("MlpParams: non-finite bias");
    }
}

long parameter_count(const MlpParams& p) {
    long n = 0;
    for (const auto& w : p.weights) n += static_cast<long>(w.size());
    for (const auto& b : p.biases) n += static_cast<long>(b.size());
    return n;
}

MlpParams init_params(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    MlpParams p;
    p.arch = arch;
    p.weights.resize(arch.hidden_layers + 1);
    p.biases.resize(arch.hidden_layers + 1);
    for (int l = 0; l <= arch.hidden_layers; ++l) {
        const int nin = layer_in(arch, l);
        const int nout = layer_out(arch, l);
        RandomStream rs(seed, static_cast<std::uint64_t>(l), 0x1717ULL);
        const double limit = std::sqrt(6.0 / (nin + nout));
        p.weights[l].resize(static_cast<std::size_t>(nin) * nout);
        for (auto& w : p.weights[l]) w = rs.uniform(-limit, limit);
        p.biases[l].assign(nout, 0.0);
    }
    p.standardizer.in_mean.assign(arch.n_in, 0.0);
    p.standardizer.in_scale.assign(arch.n_in, 1.0);
    return p;
}

std::vector<double> forward(const MlpParams& p, std::span<const double> x) {
    if (static_cast<int>(x.size()) != p.arch.n_in)
        throw std::invalid_argument("forward: input size mismatch");
    Workspace ws(p.arch);
    forward_ws(p, x, ws);
    return ws.act.back();
}

double mse_loss(const MlpParams& p, const TabularData& data) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("mse_loss: empty data");
    Workspace ws(p.arch);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        forward_ws(p, std::span(data.x).subspan(i * data.n_in, data.n_in), ws);
        for (int r = 0; r < data.n_out; ++r) {
            const double e = ws.act.back()[r] - data.y[i * data.n_out + r];
            sum += e * e;
        }
    }
    return sum / static_cast<double>(n);
}

double mse_loss_gradient(const MlpParams& p, const TabularData& data, MlpGrads& out) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("mse_loss_gradient: empty data");
    out = zero_grads(p);
    Workspace ws(p.arch);
    const double wgt = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        forward_ws(p, std::span(data.x).subspan(i * data.n_in, data.n_in), ws);
        for (int r = 0; r < data.n_out; ++r) {
            const double e = ws.act.back()[r] - data.y[i * data.n_out + r];
            sum += e * e;
        }
        accumulate_backward(p, std::span(data.y).subspan(i * data.n_out, data.n_out),
                            wgt, ws, out);
    }
    return sum / static_cast<double>(n);
}

TrainResult train_mlp(const TabularData& train, const TabularData* val,
                      const Architecture& arch, const TrainConfig& cfg) {
    if (train.size() == 0) throw std::invalid_argument("train_mlp: empty training set");
    if (train.n_in != arch.n_in || train.n_out != arch.n_out)
        throw std::invalid_argument("train_mlp: data does not match architecture");
    if (cfg.learning_rate <= 0 || cfg.batch_size < 1 || cfg.epochs < 1)
        throw std::invalid_argument("train_mlp: bad hyperparameters");

    // Deterministic holdout split when no validation set is supplied.
    TabularData train_part, val_part;
    const TabularData* train_ptr = &train;
    const TabularData* val_ptr = val;
    if (val == nullptr) {
        const std::size_t n = train.size();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        RandomStream rs(cfg.seed, 0, 0x5917ULL);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rs.next_u64() % (i + 1);
            std::swap(perm[i], perm[j]);
        }
        std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * n);
        n_val = std::min(std::max<std::size_t>(n_val, 1), n - 1);
        auto copy_rows = [&](TabularData& dst, std::size_t begin, std::size_t end) {
            dst.n_in = train.n_in;
            dst.n_out = train.n_out;
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = perm[k];
                dst.x.insert(dst.x.end(), train.x.begin() + i * train.n_in,
                             train.x.begin() + (i + 1) * train.n_in);
                dst.y.insert(dst.y.end(), train.y.begin() + i * train.n_out,
                             train.y.begin() + (i + 1) * train.n_out);
            }
        };
        copy_rows(val_part, 0, n_val);
        copy_rows(train_part, n_val, n);
        train_ptr = &train_part;
        val_ptr = &val_part;
    }

    const Standardizer stdzr = fit_standardizer(*train_ptr);
    const TabularData tr = standardize(*train_ptr, stdzr);
    const TabularData va = standardize(*val_ptr, stdzr);

    MlpParams p = init_params(arch, cfg.seed);
    p.standardizer = stdzr;

    MlpGrads g = zero_grads(p);
    MlpGrads m = zero_grads(p);
    MlpGrads v = zero_grads(p);

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;

    TrainResult res;
    res.best_val_mse = std::numeric_limits<double>::infinity();

    const std::size_t n = tr.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Workspace ws(arch);

    TabularData batch;
    batch.n_in = tr.n_in;
    batch.n_out = tr.n_out;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        RandomStream shuffle(cfg.seed, static_cast<std::uint64_t>(epoch + 1), 0x5FF1ULL);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = shuffle.next_u64() % (i + 1);
            std::swap(order[i], order[j]);
        }

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            batch.x.clear();
            batch.y.clear();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                batch.x.insert(batch.x.end(), tr.x.begin() + i * tr.n_in,
                               tr.x.begin() + (i + 1) * tr.n_in);
                batch.y.insert(batch.y.end(), tr.y.begin() + i * tr.n_out,
                               tr.y.begin() + (i + 1) * tr.n_out);
            }
            const double loss = mse_loss_gradient(p, batch, g);
            if (!std::isfinite(loss))
                throw std::runtime_error("train_mlp: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch));
            ++t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
            for (std::size_t l = 0; l < p.weights.size(); ++l) {
                auto adam = [&](std::vector<double>& theta, std::vector<double>& grad,
                                std::vector<double>& mm, std::vector<double>& vv) {
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        mm[i] = beta1 * mm[i] + (1.0 - beta1) * grad[i];
                        vv[i] = beta2 * vv[i] + (1.0 - beta2) * grad[i] * grad[i];
                        const double mhat = mm[i] / bc1;
                        const double vhat = vv[i] / bc2;
                        theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + eps);
                    }
                };
                adam(p.weights[l], g.weights[l], m.weights[l], v.weights[l]);
                adam(p.biases[l], g.biases[l], m.biases[l], v.biases[l]);
            }
        }

        const double train_mse = mse_loss(p, tr);
        const double val_mse = mse_loss(p, va);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw std::runtime_error("train_mlp: evaluation diverged at epoch " +
                                     std::to_string(epoch));
        res.train_mse.push_back(train_mse);
        res.val_mse.push_back(val_mse);
        const double best_prev = res.best_train_so_far.empty()
                                     ? std::numeric_limits<double>::infinity()
                                     : res.best_train_so_far.back();
        res.best_train_so_far.push_back(std::min(best_prev, train_mse));
        if (val_mse < res.best_val_mse) {
            res.best_val_mse = val_mse;
            res.best_epoch = epoch;
            res.params = p;
        }
    }
    return res;
}

double evaluate_mse(const MlpParams& p, const TabularData& data) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("evaluate_mse: empty data");
    Workspace ws(p.arch);
    std::vector<double> xs(p.arch.n_in);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p.standardizer.apply_in(std::span(data.x).subspan(i * data.n_in, data.n_in), xs);
        forward_ws(p, xs, ws);
        for (int r = 0; r < data.n_out; ++r) {
            const double y = p.standardizer.invert_out(ws.act.back()[r]);
            const double e = y - data.y[i * data.n_out + r];
            sum += e * e;
        }
    }
    return sum / static_cast<double>(n);
}

DnnController::DnnController(MlpParams params, std::string id, double u_min,
                             double u_max)
    : params_(std::move(params)), id_(std::move(id)), u_min_(u_min), u_max_(u_max) {
    params_.validate();
    if (params_.arch.n_in != 4 || params_.arch.n_out != 1)
        throw std::invalid_argument("DnnController: expects a 4-input, 1-output network");
}

double DnnController::compute(const std::array<double, 5>& x_hat_aug, double u_prev) {
    const std::array<double, 4> raw{x_hat_aug[0], x_hat_aug[1], x_hat_aug[2], u_prev};
    std::array<double, 4> xs;
    params_.standardizer.apply_in(raw, xs);
    const auto y = forward(params_, xs);
    return std::clamp(params_.standardizer.invert_out(y[0]), u_min_, u_max_);
}

void save_mlp(const std::string& path, const MlpParams& p,
              const std::string& metadata_json) {
    p.validate();
    json j;
    j["format"] = "kitecert-mlp";
    j["version"] = 1;
    j["architecture"] = {{"n_in", p.arch.n_in},
                         {"n_out", p.arch.n_out},
                         {"hidden_layers", p.arch.hidden_layers},
                         {"width", p.arch.width}};
    j["standardizer"] = {{"in_mean", p.standardizer.in_mean},
                         {"in_scale", p.standardizer.in_scale},
                         {"out_mean", p.standardizer.out_mean},
                         {"out_scale", p.standardizer.out_scale}};
    j["weights"] = p.weights;
    j["biases"] = p.biases;
    j["training"] = json::parse(metadata_json);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_mlp: cannot open " + path);
    f << j.dump(1) << "\n";
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_mlp: cannot open " + path);
    json j;
    f >> j;
    if (j.value("format", "") != "kitecert-mlp" || j.value("version", 0) != 1)
        throw std::runtime_error("load_mlp: unrecognized container format in " + path);
    MlpParams p;
    p.arch.n_in = j["architecture"]["n_in"];
    p.arch.n_out = j["architecture"]["n_out"];
    p.arch.hidden_layers = j["architecture"]["hidden_layers"];
    p.arch.width = j["architecture"]["width"];
    p.weights = j["weights"].get<std::vector<std::vector<double>>>();
    p.biases = j["biases"].get<std::vector<std::vector<double>>>();
    p.standardizer.in_mean = j["standardizer"]["in_mean"].get<std::vector<double>>();
    p.standardizer.in_scale = j["standardizer"]["in_scale"].get<std::vector<double>>();
    p.standardizer.out_mean = j["standardizer"]["out_mean"];
    p.standardizer.out_scale = j["standardizer"]["out_scale"];
    p.validate();
    return p;
}

std::string load_mlp_metadata(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_mlp_metadata: cannot open " + path);
    json j;
    f >> j;
    return j.value("training", json::object()).dump();
}

}  // namespace kitecert
