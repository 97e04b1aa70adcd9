#pragma once

// Serial reference implementations of the OpenMP kernels.  Deliberately naive:
// plain nested loops, no blocking, no threading.  Tests compare these against
// the parallel kernels; the benchmark tool reports the speedup.

#include "smc/common.hpp"
#include "smc/nn.hpp"

namespace smc::kernels_ref {

Matrix mlp_forward_batch_ref(const Mlp& net, const Matrix& x);

// Gaussian-product KDE log-density, accumulated in long double for use as a
// high-precision oracle.
Vector kde_log_density_ref(const Matrix& queries, const Matrix& support, const Vector& bandwidth);

double weighted_pair_sqdist_ref(const Matrix& z, const Matrix& coeff, Matrix* d_z);

}  // namespace smc::kernels_ref
