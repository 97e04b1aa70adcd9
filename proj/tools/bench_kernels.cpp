// Timing harness for the parallel kernels against their naive serial
// references. Prints per-kernel wall times, speedup and the largest
// divergence between the two implementations.
//
// Usage: bench_kernels [scale]   (scale >= 1 multiplies the problem sizes)

#include "smc/kernels.hpp"
#include "smc/kernels_ref.hpp"
#include "smc/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace smc;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

double time_best_of(const std::function<void()>& f, int reps) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s < best) best = s;
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, double max_diff) {
    std::printf("%-24s serial %9.4fs  parallel %9.4fs  speedup %5.2fx  max|diff| %.3e\n", name,
                serial_s, parallel_s, serial_s / parallel_s, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
    int scale = 1;
    if (argc > 1) scale = std::max(1, std::atoi(argv[1]));
    std::printf("threads: %d, scale: %d\n", kernels::threads(), scale);

    RngStream rng(20240817);

    {
        RngStream nrng = rng.derive("mlp-init");
        const Mlp net = Mlp::make({64, 64, 32, 2}, Activation::Identity, nrng);
        RngStream xrng = rng.derive("mlp-x");
        const Matrix x = random_matrix(4096L * scale, 64, xrng);
        Matrix a, b;
        const double ts = time_best_of([&] { a = kernels_ref::mlp_forward_batch_ref(net, x); }, 3);
        const double tp = time_best_of([&] { b = kernels::mlp_forward_batch(net, x); }, 3);
        report("mlp_forward_batch", ts, tp, (a - b).cwiseAbs().maxCoeff());
    }

    {
        RngStream qrng = rng.derive("kde-q");
        RngStream srng = rng.derive("kde-s");
        const Matrix queries = random_matrix(2048L * scale, 2, qrng);
        const Matrix support = random_matrix(1024, 2, srng);
        const Vector bandwidth = Vector::Constant(2, 0.35);
        Vector a, b;
        const double ts = time_best_of([&] { a = kernels_ref::kde_log_density_ref(queries, support, bandwidth); }, 3);
        const double tp = time_best_of([&] { b = kernels::kde_log_density_batch(queries, support, bandwidth); }, 3);
        report("kde_log_density_batch", ts, tp, (a - b).cwiseAbs().maxCoeff());
    }

    {
        RngStream zrng = rng.derive("pair-z");
        RngStream crng = rng.derive("pair-c");
        const Matrix z = random_matrix(1024L * scale, 2, zrng);
        const Matrix coeff = random_matrix(z.rows(), z.rows(), crng);
        Matrix da, db;
        double va = 0.0, vb = 0.0;
        const double ts = time_best_of([&] { va = kernels_ref::weighted_pair_sqdist_ref(z, coeff, &da); }, 3);
        const double tp = time_best_of([&] { vb = kernels::weighted_pair_sqdist(z, coeff, &db); }, 3);
        const double diff = std::max(std::abs(va - vb), (da - db).cwiseAbs().maxCoeff());
        report("weighted_pair_sqdist", ts, tp, diff);
    }

    return 0;
}
