#include "smc/kernels_ref.hpp"

namespace smc::kernels_ref {

Matrix mlp_forward_batch_ref(const Mlp& net, const Matrix& x) {
    Matrix out(x.rows(), net.output_dim());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out.row(i) = net.forward(x.row(i).transpose()).transpose();
    return out;
}

Vector kde_log_density_ref(const Matrix& queries, const Matrix& support, const Vector& bandwidth) {
    const Eigen::Index n = support.rows();
    const Eigen::Index d = support.cols();

    long double log_norm = 0.0L;
    for (Eigen::Index k = 0; k < d; ++k)
        log_norm -= std::log(static_cast<long double>(bandwidth(k)) * std::sqrt(2.0L * static_cast<long double>(kPi)));

    Vector out(queries.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        std::vector<long double> terms(static_cast<size_t>(n));
        long double max_term = -std::numeric_limits<long double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            long double quad = 0.0L;
            for (Eigen::Index k = 0; k < d; ++k) {
                long double u = (static_cast<long double>(queries(q, k)) - static_cast<long double>(support(i, k))) /
                                static_cast<long double>(bandwidth(k));
                quad += u * u;
            }
            terms[static_cast<size_t>(i)] = -0.5L * quad;
            max_term = std::max(max_term, terms[static_cast<size_t>(i)]);
        }
        long double acc = 0.0L;
        for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(terms[static_cast<size_t>(i)] - max_term);
        long double v = max_term + std::log(acc) + log_norm - std::log(static_cast<long double>(n));
        double vd = static_cast<double>(v);
        out(q) = vd < kLogZero ? kLogZero : vd;
    }
    return out;
}

double weighted_pair_sqdist_ref(const Matrix& z, const Matrix& coeff, Matrix* d_z) {
    const Eigen::Index n = z.rows();
    if (d_z) d_z->setZero(n, z.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sq = (z.row(i) - z.row(j)).squaredNorm();
            total += coeff(i, j) * sq;
            if (d_z) d_z->row(i) += 2.0 * (coeff(i, j) + coeff(j, i)) * (z.row(i) - z.row(j));
        }
    }
    return total;
}

}  // namespace smc::kernels_ref
