// Compares the parallel kernels against their serial counterparts.
#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shipperf/mlp.hpp"
#include "shipperf/mvr.hpp"

using namespace shipperf;

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int main() {
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("threads: %d\n", threads);

    {
        MlpModel model = mlp_init({10, 50, 3}, 7);
        Matrix X = Matrix::Random(400, 10);
        const int T = 2000;

        double t0 = now();
        McPrediction serial = predict_mc_serial(model, X, T, 11);
        double t1 = now();
        McPrediction parallel = predict_mc(model, X, T, 11);
        double t2 = now();
        double diff = (serial.mean - parallel.mean).cwiseAbs().maxCoeff();
        std::printf("mc dropout   (T=%d, m=400): serial %.3fs  parallel %.3fs  "
                    "speedup %.2fx  max|diff| %.3g\n",
                    T, t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1), diff);
    }

    {
        Matrix X = Matrix::Random(2000, 13);
        Matrix B = Matrix::Random(13, 5);
        Matrix Y = X * B + 0.05 * Matrix::Random(2000, 5);

        double t1 = 0, tn = 0;
#ifdef _OPENMP
        omp_set_num_threads(1);
#endif
        double t0 = now();
        CvReport serial = sequential_cv(X, Y, LinearModelKind::Plsr, 8);
        t1 = now() - t0;
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
        t0 = now();
        CvReport parallel = sequential_cv(X, Y, LinearModelKind::Plsr, 8);
        tn = now() - t0;
        double diff = (serial.press - parallel.press).cwiseAbs().maxCoeff();
        std::printf("sequential cv (m=2000, 20 folds): 1 thread %.3fs  %d threads "
                    "%.3fs  speedup %.2fx  max|diff| %.3g\n",
                    t1, threads, tn, t1 / tn, diff);
    }
    return 0;
}
