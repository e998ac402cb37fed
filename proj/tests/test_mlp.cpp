#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shipperf/mlp.hpp"

using namespace shipperf;

namespace {

void attach_identity_standardizers(MlpModel& m) {
    m.x_std.means = Vector::Zero(m.input_dim());
    m.x_std.stds = Vector::Ones(m.input_dim());
    m.y_std.means = Vector::Zero(m.output_dim());
    m.y_std.stds = Vector::Ones(m.output_dim());
}

}  // namespace

TEST_CASE("mlp_init shapes and argument checks") {
    MlpModel m = mlp_init({4, 7, 2}, 99);
    REQUIRE(m.num_layers() == 2);
    CHECK(m.weights[0].rows() == 7);
    CHECK(m.weights[0].cols() == 4);
    CHECK(m.weights[1].rows() == 2);
    CHECK(m.biases[0].norm() == 0.0);
    CHECK(m.weights[0].cwiseAbs().maxCoeff() <= std::sqrt(1.0 / 4.0));
    // Same seed, same weights; different seed, different weights.
    MlpModel m2 = mlp_init({4, 7, 2}, 99);
    CHECK((m.weights[0] - m2.weights[0]).norm() == 0.0);
    MlpModel m3 = mlp_init({4, 7, 2}, 100);
    CHECK((m.weights[0] - m3.weights[0]).norm() > 0.0);

    CHECK_THROWS_AS(mlp_init({4, 2}, 1), ModelError);
    CHECK_THROWS_AS(mlp_init({4, 0, 2}, 1), ModelError);
    CHECK_THROWS_AS(mlp_init({4, 7, 2}, 1, 1.0), ModelError);
}

TEST_CASE("dropout masks are keyed by (seed, index)") {
    MlpModel m = mlp_init({6, 10, 2}, 5, 0.4);
    DropoutMasks a = sample_masks(m, 7, 3);
    DropoutMasks b = sample_masks(m, 7, 3);
    DropoutMasks c = sample_masks(m, 7, 4);
    REQUIRE(a.per_layer.size() == 2);
    CHECK((a.per_layer[0] - b.per_layer[0]).norm() == 0.0);
    CHECK((a.per_layer[1] - b.per_layer[1]).norm() == 0.0);
    bool differs = (a.per_layer[0] - c.per_layer[0]).norm() > 0 ||
                   (a.per_layer[1] - c.per_layer[1]).norm() > 0;
    CHECK(differs);
    // Inverted scaling: entries are 0 or 1/(1-p).
    for (const Vector& v : a.per_layer)
        for (Eigen::Index i = 0; i < v.size(); ++i)
            CHECK((v[i] == 0.0 || v[i] == doctest::Approx(1.0 / 0.6)));
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0, 1);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int n_in = 2 + cfg % 4;
        int hidden = 3 + cfg % 5;
        int n_out = 1 + cfg % 3;
        MlpModel m = mlp_init({n_in, hidden, n_out}, 1000 + cfg,
                              (cfg % 2) ? 0.3 : 0.0);
        m.lambda = 0.01;
        Matrix X(6, n_in), Y(6, n_out);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < n_in; ++j) X(i, j) = g(rng);
            for (int j = 0; j < n_out; ++j) Y(i, j) = g(rng);
        }
        DropoutMasks masks = sample_masks(m, 77, static_cast<std::uint64_t>(cfg));

        MlpGradients grads;
        mlp_loss_and_grad(m, X, Y, &masks, &grads);
        Vector analytic(mlp_get_params(m).size());
        {
            Eigen::Index at = 0;
            for (int l = 0; l < m.num_layers(); ++l) {
                const auto ul = static_cast<std::size_t>(l);
                analytic.segment(at, grads.d_weights[ul].size()) =
                    Eigen::Map<const Vector>(grads.d_weights[ul].data(),
                                             grads.d_weights[ul].size());
                at += grads.d_weights[ul].size();
                analytic.segment(at, grads.d_biases[ul].size()) = grads.d_biases[ul];
                at += grads.d_biases[ul].size();
            }
        }

        const double h = 1e-5;
        Vector p0 = mlp_get_params(m);
        Vector numeric(p0.size());
        for (Eigen::Index i = 0; i < p0.size(); ++i) {
            Vector p = p0;
            p[i] = p0[i] + h;
            mlp_set_params(m, p);
            double up = mlp_loss_and_grad(m, X, Y, &masks, nullptr);
            p[i] = p0[i] - h;
            mlp_set_params(m, p);
            double dn = mlp_loss_and_grad(m, X, Y, &masks, nullptr);
            numeric[i] = (up - dn) / (2 * h);
        }
        mlp_set_params(m, p0);
        double rel = (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
        CHECK(rel < 1e-5);
    }
}

TEST_CASE("regularization constant follows the dropout identity") {
    MlpModel m = mlp_init({3, 50, 2}, 4, 0.2, 1.0, 10.0);
    Matrix X = Matrix::Random(1000, 3);
    Matrix Y = Matrix::Random(1000, 2);
    TrainOptions opts;
    opts.epochs = 1;
    mlp_train(m, X, Y, Matrix(), Matrix(), opts);
    CHECK(m.lambda == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(m.n_train == 1000);
}

TEST_CASE("mc dropout with p=0 collapses to the standard prediction") {
    MlpModel m = mlp_init({5, 12, 3}, 8, 0.0);
    attach_identity_standardizers(m);
    Matrix X = Matrix::Random(20, 5);
    McPrediction mc = predict_mc(m, X, 50, 123);
    Matrix standard = predict_standard(m, X);
    Matrix mc_raw = destandardize_mean(m, mc.mean);
    // Bitwise identical: multiplying by an all-ones mask is exact.
    CHECK((mc_raw - standard).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < mc.variance.rows(); ++i)
        for (Eigen::Index j = 0; j < mc.variance.cols(); ++j)
            CHECK(mc.variance(i, j) == 1.0 / m.tau);
}

TEST_CASE("mc prediction matches a naive per-pass oracle") {
    MlpModel m = mlp_init({4, 9, 2}, 13, 0.3, 2.0);
    Matrix X = Matrix::Random(7, 4);
    const int T = 40;
    const std::uint64_t seed = 55;
    McPrediction got = predict_mc(m, X, T, seed);

    Matrix sum = Matrix::Zero(7, 2), sumsq = Matrix::Zero(7, 2);
    for (int t = 0; t < T; ++t) {
        DropoutMasks masks = sample_masks(m, seed, static_cast<std::uint64_t>(t));
        Matrix y = mlp_forward(m, X, &masks);
        sum += y;
        sumsq += y.cwiseProduct(y);
    }
    Matrix mean = sum / T;
    Matrix var = (sumsq / T - mean.cwiseProduct(mean)).array() + 1.0 / m.tau;
    CHECK((got.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((got.variance - var).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(got.passes_used == T);
}

TEST_CASE("parallel and serial mc kernels agree") {
    MlpModel m = mlp_init({6, 20, 2}, 17, 0.2);
    Matrix X = Matrix::Random(15, 6);
    McPrediction par = predict_mc(m, X, 128, 3);
    McPrediction ser = predict_mc_serial(m, X, 128, 3);
    CHECK((par.mean - ser.mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((par.variance - ser.variance).cwiseAbs().maxCoeff() < 1e-12);
    // Rerun is bit-identical.
    McPrediction again = predict_mc(m, X, 128, 3);
    CHECK((par.mean - again.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((par.variance - again.variance).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training fits a smooth target and is reproducible") {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> g(0, 1);
    Matrix X(200, 2), Y(200, 1);
    for (int i = 0; i < 200; ++i) {
        X(i, 0) = g(rng);
        X(i, 1) = g(rng);
        Y(i, 0) = 0.5 * X(i, 0) - 0.3 * X(i, 1) + 0.1 * X(i, 0) * X(i, 1);
    }
    TrainOptions opts;
    opts.epochs = 400;

    // Short prior length scale so the weight decay does not swamp a 200-row fit.
    MlpModel a = mlp_init({2, 16, 1}, 3, 0.05, 1.0, 0.1);
    TrainHistory ha = mlp_train(a, X, Y, X.topRows(20), Y.topRows(20), opts);
    CHECK(ha.train_loss.size() == 400);
    CHECK(ha.val_loss.size() == 400);
    CHECK(ha.train_loss.back() < 0.25 * ha.train_loss.front());

    MlpModel b = mlp_init({2, 16, 1}, 3, 0.05, 1.0, 0.1);
    TrainHistory hb = mlp_train(b, X, Y, X.topRows(20), Y.topRows(20), opts);
    CHECK((mlp_get_params(a) - mlp_get_params(b)).norm() == 0.0);
    CHECK(ha.train_loss.back() == hb.train_loss.back());
}

TEST_CASE("training reports divergence") {
    Matrix X = Matrix::Random(50, 3);
    Matrix Y = 1e6 * Matrix::Random(50, 1);
    MlpModel m = mlp_init({3, 8, 1}, 5);
    TrainOptions opts;
    opts.epochs = 200;
    // Large enough that the post-step forward pass overflows to infinity.
    opts.learning_rate = 1e200;
    CHECK_THROWS_AS(mlp_train(m, X, Y, Matrix(), Matrix(), opts), ModelError);
}

TEST_CASE("parameter flattening round-trips") {
    MlpModel m = mlp_init({3, 5, 2}, 6);
    Vector p = mlp_get_params(m);
    CHECK(p.size() == 3 * 5 + 5 + 5 * 2 + 2);
    Vector q = p;
    q[0] += 1.5;
    mlp_set_params(m, q);
    CHECK(mlp_get_params(m)[0] == p[0] + 1.5);
    CHECK(m.weights[0](0, 0) == p[0] + 1.5);
}

TEST_CASE("destandardize_variance scales by squared target std") {
    MlpModel m = mlp_init({2, 4, 2}, 9);
    m.y_std.means = Vector::Zero(2);
    m.y_std.stds = Vector(2);
    m.y_std.stds << 2.0, 10.0;
    Matrix v = Matrix::Ones(3, 2);
    Matrix out = destandardize_variance(m, v);
    CHECK(out(0, 0) == doctest::Approx(4.0));
    CHECK(out(0, 1) == doctest::Approx(100.0));
}
