#pragma once

#include <cstdint>
#include <vector>

#include "shipperf/preprocess.hpp"

namespace shipperf {

// Feed-forward network, ReLU hidden layers, identity output. Dropout is
// applied to the input of every weight layer with inverted scaling, so the
// mask-free forward pass needs no rescaling.
struct MlpModel {
    std::vector<int> layer_sizes;  // [n, hidden..., k]
    std::vector<Matrix> weights;   // weights[l]: out x in
    std::vector<Vector> biases;
    double p_drop = 0.2;
    double tau = 1.0;
    double length_scale = 10.0;
    double lambda = 0.0;  // set when trained: l^2 (1-p) / (2 n_train tau)
    int n_train = 0;
    std::uint64_t seed = 0;
    int t_passes = 10000;
    Standardizer x_std;
    Standardizer y_std;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
};

MlpModel mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed,
                  double p_drop = 0.2, double tau = 1.0, double length_scale = 10.0);

// One inverted-dropout mask vector per weight layer; entries are 0 or
// 1/(1 - p_drop).
struct DropoutMasks {
    std::vector<Vector> per_layer;
};

// Mask stream keyed by (seed, index) so any parallel schedule reproduces
// the same masks.
DropoutMasks sample_masks(const MlpModel& model, std::uint64_t seed,
                          std::uint64_t index);

// Forward pass on standardized inputs; masks may be null (mask-free).
Matrix mlp_forward(const MlpModel& model, const Matrix& X_std,
                   const DropoutMasks* masks);

struct MlpGradients {
    std::vector<Matrix> d_weights;
    std::vector<Vector> d_biases;
};

// MSE + L2 objective and its analytic gradient under the given frozen masks.
double mlp_loss_and_grad(const MlpModel& model, const Matrix& X_std,
                         const Matrix& Y_std, const DropoutMasks* masks,
                         MlpGradients* grads);

// Flattened parameter access (weights then biases, layer by layer).
Vector mlp_get_params(const MlpModel& model);
void mlp_set_params(MlpModel& model, const Vector& params);

struct TrainOptions {
    int epochs = 2000;
    double batch_frac = 0.05;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch, mask-free full objective
    std::vector<double> val_loss;    // per epoch, mask-free MSE
};

// Minimizes the MSE + L2 objective with per-batch resampled dropout masks
// and adaptive-moment updates. lambda is derived from the model's length
// scale, dropout probability, precision and the training row count.
// Reproducible given model.seed. Throws ModelError on divergence.
TrainHistory mlp_train(MlpModel& model, const Matrix& X_train, const Matrix& Y_train,
                       const Matrix& X_val, const Matrix& Y_val,
                       const TrainOptions& opts = {});

// Deterministic mask-free prediction, destandardized.
Matrix predict_standard(const MlpModel& model, const Matrix& X_raw);

struct McPrediction {
    Matrix mean;      // m x k, standardized scale
    Matrix variance;  // m x k, predictive (sample variance + 1/tau)
    int passes_used = 0;
};

// T stochastic forward passes on standardized inputs. Pass t draws its mask
// from (seed, t), so results are schedule-independent.
McPrediction predict_mc(const MlpModel& model, const Matrix& X_std, int T,
                        std::uint64_t seed);

// Serial reference for the parallel kernel in predict_mc; kept for tests
// and the benchmark target.
McPrediction predict_mc_serial(const MlpModel& model, const Matrix& X_std, int T,
                               std::uint64_t seed);

Matrix destandardize_mean(const MlpModel& model, const Matrix& mean_std);
// Maps standardized predictive variance through the target scaling.
Matrix destandardize_variance(const MlpModel& model, const Matrix& var_std);

}  // namespace shipperf
