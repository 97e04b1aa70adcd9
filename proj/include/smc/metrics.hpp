// Evaluation metrics shared by the benchmark harness and tests.

#ifndef SMC_METRICS_HPP
#define SMC_METRICS_HPP

#include "smc/common.hpp"

#include <vector>

namespace smc {

double rmse(const Eigen::Ref<const Vector>& predictions, const Eigen::Ref<const Vector>& truths);

// rmse normalised by the root-mean-square of the truths.
double relative_rmse(const Eigen::Ref<const Vector>& predictions, const Eigen::Ref<const Vector>& truths);

// One-vs-rest AUROC: unweighted mean over classes k of the binary AUROC of
// score column k against indicator(label == k). Ties handled by midrank.
// Every class 0..K-1 must appear in labels at least once.
double auroc_ovr(const Matrix& scores, const std::vector<int>& labels);

// Binary AUROC with midrank tie handling; labels are 0/1 and both must occur.
double auroc_binary(const Vector& scores, const std::vector<int>& labels);

}  // namespace smc

#endif  // SMC_METRICS_HPP
