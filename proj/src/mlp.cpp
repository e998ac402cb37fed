#include "shipperf/mlp.hpp"

#include <cmath>
#include <random>

namespace shipperf {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from the raw engine output; bit-stable across platforms.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

}  // namespace

MlpModel mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed,
                  double p_drop, double tau, double length_scale) {
    if (layer_sizes.size() < 3)
        throw ModelError("mlp_init: need at least one hidden layer");
    for (int s : layer_sizes)
        if (s < 1) throw ModelError("mlp_init: zero-size layer");
    if (p_drop < 0.0 || p_drop >= 1.0)
        throw ModelError("mlp_init: p_drop must be in [0, 1)");

    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.p_drop = p_drop;
    m.tau = tau;
    m.length_scale = length_scale;
    m.seed = seed;

    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        int fan_in = layer_sizes[l];
        int fan_out = layer_sizes[l + 1];
        double scale = std::sqrt(1.0 / fan_in);
        std::mt19937_64 rng(splitmix64(seed ^ (0xA11CEULL + l)));
        Matrix W(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                W(r, c) = scale * (2.0 * uniform01(rng) - 1.0);
        m.weights.push_back(std::move(W));
        m.biases.push_back(Vector::Zero(fan_out));
    }
    return m;
}

DropoutMasks sample_masks(const MlpModel& model, std::uint64_t seed,
                          std::uint64_t index) {
    DropoutMasks masks;
    masks.per_layer.reserve(model.weights.size());
    const double keep = 1.0 - model.p_drop;
    const double scale = 1.0 / keep;
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(index)));
    for (int l = 0; l < model.num_layers(); ++l) {
        int dim = model.layer_sizes[static_cast<std::size_t>(l)];
        Vector mask(dim);
        if (model.p_drop == 0.0) {
            mask.setOnes();
        } else {
            for (int i = 0; i < dim; ++i)
                mask[i] = (uniform01(rng) < keep) ? scale : 0.0;
        }
        masks.per_layer.push_back(std::move(mask));
    }
    return masks;
}

Matrix mlp_forward(const MlpModel& model, const Matrix& X_std,
                   const DropoutMasks* masks) {
    if (X_std.cols() != model.input_dim())
        throw ModelError("mlp_forward: input column mismatch");
    Matrix A = X_std;
    for (int l = 0; l < model.num_layers(); ++l) {
        if (masks)
            A = A.array().rowwise() *
                masks->per_layer[static_cast<std::size_t>(l)].transpose().array();
        Matrix Z = A * model.weights[static_cast<std::size_t>(l)].transpose();
        Z.rowwise() += model.biases[static_cast<std::size_t>(l)].transpose();
        A = (l + 1 < model.num_layers()) ? relu(Z) : Z;
    }
    return A;
}

double mlp_loss_and_grad(const MlpModel& model, const Matrix& X_std,
                         const Matrix& Y_std, const DropoutMasks* masks,
                         MlpGradients* grads) {
    const int L = model.num_layers();
    const double m = static_cast<double>(X_std.rows());

    std::vector<Matrix> masked_inputs(static_cast<std::size_t>(L));
    std::vector<Matrix> pre_acts(static_cast<std::size_t>(L));
    Matrix A = X_std;
    for (int l = 0; l < L; ++l) {
        if (masks)
            A = A.array().rowwise() *
                masks->per_layer[static_cast<std::size_t>(l)].transpose().array();
        masked_inputs[static_cast<std::size_t>(l)] = A;
        Matrix Z = A * model.weights[static_cast<std::size_t>(l)].transpose();
        Z.rowwise() += model.biases[static_cast<std::size_t>(l)].transpose();
        pre_acts[static_cast<std::size_t>(l)] = Z;
        A = (l + 1 < L) ? relu(Z) : Z;
    }

    Matrix err = A - Y_std;
    double loss = err.squaredNorm() / m;
    for (int l = 0; l < L; ++l)
        loss += model.lambda * (model.weights[static_cast<std::size_t>(l)].squaredNorm() +
                                model.biases[static_cast<std::size_t>(l)].squaredNorm());

    if (grads) {
        grads->d_weights.assign(static_cast<std::size_t>(L), Matrix());
        grads->d_biases.assign(static_cast<std::size_t>(L), Vector());
        Matrix delta = (2.0 / m) * err;  // d loss / d pre-activation of layer L
        for (int l = L - 1; l >= 0; --l) {
            const auto ul = static_cast<std::size_t>(l);
            grads->d_weights[ul] = delta.transpose() * masked_inputs[ul] +
                                   2.0 * model.lambda * model.weights[ul];
            grads->d_biases[ul] = delta.colwise().sum().transpose() +
                                  2.0 * model.lambda * model.biases[ul];
            if (l > 0) {
                Matrix dA = delta * model.weights[ul];
                if (masks)
                    dA = dA.array().rowwise() * masks->per_layer[ul].transpose().array();
                // ReLU derivative of the previous layer's pre-activation.
                delta = dA.array() *
                        (pre_acts[ul - 1].array() > 0.0).cast<double>();
            }
        }
    }
    return loss;
}

Vector mlp_get_params(const MlpModel& model) {
    Eigen::Index total = 0;
    for (int l = 0; l < model.num_layers(); ++l)
        total += model.weights[static_cast<std::size_t>(l)].size() +
                 model.biases[static_cast<std::size_t>(l)].size();
    Vector p(total);
    Eigen::Index at = 0;
    for (int l = 0; l < model.num_layers(); ++l) {
        const auto& W = model.weights[static_cast<std::size_t>(l)];
        const auto& b = model.biases[static_cast<std::size_t>(l)];
        p.segment(at, W.size()) = Eigen::Map<const Vector>(W.data(), W.size());
        at += W.size();
        p.segment(at, b.size()) = b;
        at += b.size();
    }
    return p;
}

void mlp_set_params(MlpModel& model, const Vector& params) {
    Eigen::Index at = 0;
    for (int l = 0; l < model.num_layers(); ++l) {
        auto& W = model.weights[static_cast<std::size_t>(l)];
        auto& b = model.biases[static_cast<std::size_t>(l)];
        Eigen::Map<Vector>(W.data(), W.size()) = params.segment(at, W.size());
        at += W.size();
        b = params.segment(at, b.size());
        at += b.size();
    }
}

TrainHistory mlp_train(MlpModel& model, const Matrix& X_train, const Matrix& Y_train,
                       const Matrix& X_val, const Matrix& Y_val,
                       const TrainOptions& opts) {
    const int n = static_cast<int>(X_train.rows());
    if (n < 1) throw ModelError("mlp_train: empty training set");
    model.n_train = n;
    model.lambda = model.length_scale * model.length_scale * (1.0 - model.p_drop) /
                   (2.0 * n * model.tau);

    const int batch = std::max(1, static_cast<int>(std::lround(opts.batch_frac * n)));
    std::mt19937_64 shuffle_rng(splitmix64(model.seed ^ 0x5487FFULL));

    // Adam state.
    const int L = model.num_layers();
    std::vector<Matrix> mW(static_cast<std::size_t>(L)), vW(static_cast<std::size_t>(L));
    std::vector<Vector> mB(static_cast<std::size_t>(L)), vB(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        mW[ul] = Matrix::Zero(model.weights[ul].rows(), model.weights[ul].cols());
        vW[ul] = mW[ul];
        mB[ul] = Vector::Zero(model.biases[ul].size());
        vB[ul] = mB[ul];
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    TrainHistory hist;
    std::uint64_t mask_index = 0;
    long long step = 0;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        // Fisher-Yates with the raw engine stream; deterministic by seed.
        for (int i = n - 1; i > 0; --i) {
            auto j = static_cast<int>(shuffle_rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        for (int start = 0; start < n; start += batch) {
            int count = std::min(batch, n - start);
            Matrix Xb(count, X_train.cols()), Yb(count, Y_train.cols());
            for (int i = 0; i < count; ++i) {
                int r = order[static_cast<std::size_t>(start + i)];
                Xb.row(i) = X_train.row(r);
                Yb.row(i) = Y_train.row(r);
            }
            DropoutMasks masks = sample_masks(model, model.seed, mask_index++);
            MlpGradients g;
            double loss = mlp_loss_and_grad(model, Xb, Yb, &masks, &g);
            if (!std::isfinite(loss))
                throw ModelError("mlp_train: diverged at epoch " + std::to_string(epoch));
            ++step;
            double bc1 = 1.0 - std::pow(opts.adam_beta1, static_cast<double>(step));
            double bc2 = 1.0 - std::pow(opts.adam_beta2, static_cast<double>(step));
            for (int l = 0; l < L; ++l) {
                const auto ul = static_cast<std::size_t>(l);
                mW[ul] = opts.adam_beta1 * mW[ul] + (1 - opts.adam_beta1) * g.d_weights[ul];
                vW[ul] = opts.adam_beta2 * vW[ul] +
                         (1 - opts.adam_beta2) * g.d_weights[ul].array().square().matrix();
                mB[ul] = opts.adam_beta1 * mB[ul] + (1 - opts.adam_beta1) * g.d_biases[ul];
                vB[ul] = opts.adam_beta2 * vB[ul] +
                         (1 - opts.adam_beta2) * g.d_biases[ul].array().square().matrix();
                model.weights[ul].array() -=
                    opts.learning_rate * (mW[ul].array() / bc1) /
                    ((vW[ul].array() / bc2).sqrt() + opts.adam_eps);
                model.biases[ul].array() -=
                    opts.learning_rate * (mB[ul].array() / bc1) /
                    ((vB[ul].array() / bc2).sqrt() + opts.adam_eps);
            }
        }
        hist.train_loss.push_back(
            mlp_loss_and_grad(model, X_train, Y_train, nullptr, nullptr));
        if (X_val.rows() > 0) {
            Matrix pred = mlp_forward(model, X_val, nullptr);
            hist.val_loss.push_back((pred - Y_val).squaredNorm() /
                                    static_cast<double>(X_val.rows()));
        }
    }
    return hist;
}

Matrix predict_standard(const MlpModel& model, const Matrix& X_raw) {
    if (model.x_std.means.size() == 0)
        throw ModelError("predict_standard: standardizer not attached");
    if (X_raw.cols() != model.x_std.means.size())
        throw ModelError("predict_standard: input column mismatch");
    return model.y_std.invert(mlp_forward(model, model.x_std.apply(X_raw), nullptr));
}

namespace {

McPrediction mc_impl(const MlpModel& model, const Matrix& X_std, int T,
                     std::uint64_t seed, bool parallel) {
    if (T < 1) throw ModelError("predict_mc: T must be >= 1");
    const auto m = X_std.rows();
    const auto k = model.output_dim();

    // Masks are precomputed per pass, and passes are accumulated in a fixed
    // chunk layout that does not depend on the thread count, so results are
    // identical under any schedule.
    std::vector<DropoutMasks> masks;
    masks.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t)
        masks.push_back(sample_masks(model, seed, static_cast<std::uint64_t>(t)));

    const int chunks = parallel ? std::min(16, T) : 1;
    std::vector<Matrix> chunk_mean(static_cast<std::size_t>(chunks));
    std::vector<Matrix> chunk_m2(static_cast<std::size_t>(chunks));
    std::vector<int> chunk_n(static_cast<std::size_t>(chunks), 0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int c = 0; c < chunks; ++c) {
        int lo = static_cast<int>(static_cast<long long>(c) * T / chunks);
        int hi = static_cast<int>(static_cast<long long>(c + 1) * T / chunks);
        Matrix mean = Matrix::Zero(m, k);
        Matrix m2 = Matrix::Zero(m, k);
        for (int t = lo; t < hi; ++t) {
            Matrix y = mlp_forward(model, X_std, &masks[static_cast<std::size_t>(t)]);
            Matrix delta = y - mean;
            mean += delta / static_cast<double>(t - lo + 1);
            m2 += delta.cwiseProduct(y - mean);
        }
        chunk_mean[static_cast<std::size_t>(c)] = std::move(mean);
        chunk_m2[static_cast<std::size_t>(c)] = std::move(m2);
        chunk_n[static_cast<std::size_t>(c)] = hi - lo;
    }

    // Sequential merge in chunk order (pairwise mean/variance combination).
    Matrix mean = chunk_mean[0];
    Matrix m2 = chunk_m2[0];
    double n_a = chunk_n[0];
    for (int c = 1; c < chunks; ++c) {
        double n_b = chunk_n[static_cast<std::size_t>(c)];
        if (n_b <= 0) continue;
        Matrix delta = chunk_mean[static_cast<std::size_t>(c)] - mean;
        double n_ab = n_a + n_b;
        mean += delta * (n_b / n_ab);
        m2 += chunk_m2[static_cast<std::size_t>(c)] +
              delta.cwiseProduct(delta) * (n_a * n_b / n_ab);
        n_a = n_ab;
    }

    McPrediction out;
    out.mean = std::move(mean);
    out.variance = (m2 / static_cast<double>(T)).array() + 1.0 / model.tau;
    out.passes_used = T;
    return out;
}

}  // namespace

McPrediction predict_mc(const MlpModel& model, const Matrix& X_std, int T,
                        std::uint64_t seed) {
    return mc_impl(model, X_std, T, seed, true);
}

McPrediction predict_mc_serial(const MlpModel& model, const Matrix& X_std, int T,
                               std::uint64_t seed) {
    return mc_impl(model, X_std, T, seed, false);
}

Matrix destandardize_mean(const MlpModel& model, const Matrix& mean_std) {
    return model.y_std.invert(mean_std);
}

Matrix destandardize_variance(const MlpModel& model, const Matrix& var_std) {
    return var_std.array().rowwise() *
           model.y_std.stds.transpose().array().square();
}

}  // namespace shipperf
