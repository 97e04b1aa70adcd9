#include "smc/kernels.hpp"

#include <omp.h>

namespace smc::kernels {

namespace {
int g_threads = 0;  // 0 = OpenMP default
}

void set_threads(int n) {
    g_threads = n > 0 ? n : 0;
    if (g_threads > 0) omp_set_num_threads(g_threads);
}

int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

Matrix mlp_forward_batch(const Mlp& net, const Matrix& x) {
    require(x.cols() == net.input_dim(), "mlp_forward_batch: input dim mismatch");
    Matrix out(x.rows(), net.output_dim());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out.row(i) = net.forward(x.row(i).transpose()).transpose();
    return out;
}

Vector kde_log_density_batch(const Matrix& queries, const Matrix& support, const Vector& bandwidth) {
    require(queries.cols() == support.cols(), "kde_log_density_batch: dim mismatch");
    require(bandwidth.size() == support.cols(), "kde_log_density_batch: bandwidth dim mismatch");
    require(support.rows() >= 1, "kde_log_density_batch: empty support");

    const Eigen::Index n = support.rows();
    const Eigen::Index d = support.cols();

    // log of the per-kernel normalising constant, shared by all queries
    double log_norm = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) log_norm -= std::log(bandwidth(k) * std::sqrt(2.0 * kPi));

    Vector out(queries.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        // log-sum-exp over support points, fixed order
        double max_term = -std::numeric_limits<double>::infinity();
        Vector terms(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double quad = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                double u = (queries(q, k) - support(i, k)) / bandwidth(k);
                quad += u * u;
            }
            terms(i) = -0.5 * quad;
            if (terms(i) > max_term) max_term = terms(i);
        }
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(terms(i) - max_term);
        out(q) = max_term + std::log(acc) + log_norm - std::log(static_cast<double>(n));
        if (out(q) < kLogZero) out(q) = kLogZero;
    }
    return out;
}

double weighted_pair_sqdist(const Matrix& z, const Matrix& coeff, Matrix* d_z) {
    const Eigen::Index n = z.rows();
    require(coeff.rows() == n && coeff.cols() == n, "weighted_pair_sqdist: coefficient shape mismatch");

    Vector row_sums = Vector::Zero(n);
    if (d_z) d_z->setZero(n, z.cols());

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sq = (z.row(i) - z.row(j)).squaredNorm();
            acc += coeff(i, j) * sq;
            if (d_z) {
                // value depends on z_i through both the (i,j) and (j,i) terms
                d_z->row(i) += 2.0 * (coeff(i, j) + coeff(j, i)) * (z.row(i) - z.row(j));
            }
        }
        row_sums(i) = acc;
    }

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += row_sums(i);
    return total;
}

}  // namespace smc::kernels
