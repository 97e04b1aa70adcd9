// Data-parallel inner loops, OpenMP-backed. Every kernel is bitwise
// deterministic for any thread count: each output slot is written by exactly
// one thread with a fixed-order inner loop, and reductions accumulate into
// fixed-size blocks that are merged in index order. kernels_ref.hpp keeps
// naive serial implementations of the same contracts for tests and the
// benchmark tool.

#ifndef SMC_KERNELS_HPP
#define SMC_KERNELS_HPP

#include "smc/common.hpp"
#include "smc/nn.hpp"

#include <vector>

namespace smc::kernels {

// Thread budget for all kernels. n <= 0 resets to the OpenMP default.
void set_threads(int n);
int threads();

// Rows of X pushed through a frozen net, one output row per input row.
Matrix mlp_forward_batch(const Mlp& net, const Matrix& x);

// Gaussian product-kernel KDE log density of every query row given support
// points and a per-dimension bandwidth. out(i) = log p(queries.row(i)).
Vector kde_log_density_batch(const Matrix& queries, const Matrix& support, const Vector& bandwidth);

// Sum over ordered pairs (i, j) of coeff(i, j) * ||z_i - z_j||^2. When d_z is
// non-null it receives the gradient with respect to each row of z.
double weighted_pair_sqdist(const Matrix& z, const Matrix& coeff, Matrix* d_z);

// Row-block size used by blocked_row_reduce; fixed so summation order never
// depends on the thread count.
inline constexpr Eigen::Index kRowBlock = 16;

// Parallel reduction over rows [0, n). Each fixed block of kRowBlock rows
// accumulates serially into its own Acc; blocks merge in index order.
//   add_row(acc, i)  folds row i into a block accumulator
//   merge(total, acc) folds one block into the running total
template <typename Acc, typename MakeAcc, typename AddRow, typename Merge>
Acc blocked_row_reduce(Eigen::Index n, MakeAcc make_acc, AddRow add_row, Merge merge) {
    const Eigen::Index nblocks = n <= 0 ? 0 : (n + kRowBlock - 1) / kRowBlock;
    std::vector<Acc> block(static_cast<size_t>(nblocks), make_acc());
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index end = std::min(n, (b + 1) * kRowBlock);
        for (Eigen::Index i = b * kRowBlock; i < end; ++i) add_row(block[static_cast<size_t>(b)], i);
    }
    Acc total = make_acc();
    for (Eigen::Index b = 0; b < nblocks; ++b) merge(total, block[static_cast<size_t>(b)]);
    return total;
}

}  // namespace smc::kernels

#endif  // SMC_KERNELS_HPP
