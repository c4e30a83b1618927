#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kitecert/simulate.hpp"

namespace kitecert {

struct Architecture {
    int n_in = 4;
    int n_out = 1;
    int hidden_layers = 6;  // L
    int width = 30;         // H

    void validate() const;
};

// Complexity measures as conventionally defined for this architecture family:
// weight count n_x(H+1) + (L-1)(H+1)H + H(n_u+1), neuron count L*H. The
// weight formula is a complexity measure, not the allocated-array total; see
// parameter_count for the latter.
long count_weights(int n_x, int n_u, int layers, int width);
long count_weights(const Architecture& arch);
long count_neurons(const Architecture& arch);

// z-score transform fitted on the training split and stored with the
// parameters; the network always runs in standardized space.
struct Standardizer {
    std::vector<double> in_mean, in_scale;
    double out_mean = 0.0, out_scale = 1.0;

    void apply_in(std::span<const double> x, std::span<double> out) const;
    double invert_out(double y_std) const { return y_std * out_scale + out_mean; }
};

struct MlpParams {
    Architecture arch;
    std::vector<std::vector<double>> weights;  // per layer, row-major out x in
    std::vector<std::vector<double>> biases;   // per layer
    Standardizer standardizer;

    void validate() const;
};

// Total number of stored weight/bias entries.
long parameter_count(const MlpParams& p);

// Symmetric-uniform fan-based initialization, zero biases, deterministic in
// the seed. The standardizer is left as identity.
MlpParams init_params(const Architecture& arch, std::uint64_t seed);

// Raw network evaluation (tanh hidden layers, affine output); no
// standardization is applied here.
std::vector<double> forward(const MlpParams& p, std::span<const double> x);

// Row-major sample matrix for training and evaluation.
struct TabularData {
    int n_in = 0;
    int n_out = 0;
    std::vector<double> x;  // n * n_in
    std::vector<double> y;  // n * n_out
    std::size_t size() const { return n_in ? x.size() / n_in : 0; }
};

// Mean squared error of the raw network on data given in network space.
double mse_loss(const MlpParams& p, const TabularData& data);

// Loss plus its gradient via backpropagation; gradient layout mirrors the
// parameter layout.
struct MlpGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};
double mse_loss_gradient(const MlpParams& p, const TabularData& data, MlpGrads& out);

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 400;
    std::uint64_t seed = 1;
    double val_fraction = 0.15;  // used only when no validation set is passed
};

struct TrainResult {
    MlpParams params;  // best-on-validation checkpoint
    std::vector<double> train_mse;          // per epoch, standardized space
    std::vector<double> val_mse;            // per epoch, standardized space
    std::vector<double> best_train_so_far;  // running minimum of train_mse
    double best_val_mse = 0.0;
    int best_epoch = -1;
};

// Adam on the standardized mean squared error with seeded mini-batch
// shuffling. If val == nullptr a deterministic split of `train` is used.
// Throws on divergence (non-finite loss).
TrainResult train_mlp(const TabularData& train, const TabularData* val,
                      const Architecture& arch, const TrainConfig& cfg);

// MSE of the full pipeline (standardize, forward, de-standardize) against
// data in physical units.
double evaluate_mse(const MlpParams& p, const TabularData& data);

// Feedback law: standardized forward pass on [theta, phi, psi, u_prev],
// output de-standardized and clipped to the actuator box.
class DnnController final : public Controller {
public:
    DnnController(MlpParams params, std::string id, double u_min = -10.0,
                  double u_max = 10.0);

    double compute(const std::array<double, 5>& x_hat_aug, double u_prev) override;
    std::string id() const override { return id_; }

    const MlpParams& params() const { return params_; }

private:
    MlpParams params_;
    std::string id_;
    double u_min_, u_max_;
};

// Versioned JSON container with architecture header, standardization stats
// and training metadata.
void save_mlp(const std::string& path, const MlpParams& p,
              const std::string& metadata_json = "{}");
MlpParams load_mlp(const std::string& path);
std::string load_mlp_metadata(const std::string& path);

}  // namespace kitecert
