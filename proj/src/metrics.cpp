#include "smc/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace smc {

double rmse(const Eigen::Ref<const Vector>& predictions, const Eigen::Ref<const Vector>& truths) {
    require(predictions.size() == truths.size(), "rmse: length mismatch");
    require(predictions.size() >= 1, "rmse: empty input");
    require(predictions.allFinite() && truths.allFinite(), "rmse: non-finite entry");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        double d = predictions(i) - truths(i);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

double relative_rmse(const Eigen::Ref<const Vector>& predictions, const Eigen::Ref<const Vector>& truths) {
    double scale = std::sqrt(truths.squaredNorm() / static_cast<double>(truths.size()));
    require(scale > 0.0, "relative_rmse: all-zero truths");
    return rmse(predictions, truths) / scale;
}

double auroc_binary(const Vector& scores, const std::vector<int>& labels) {
    require(scores.size() == static_cast<Eigen::Index>(labels.size()), "auroc: length mismatch");
    require(scores.allFinite(), "auroc: non-finite score");

    const size_t n = labels.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b)); });

    // Midranks over tied score groups, then the Mann-Whitney identity.
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores(static_cast<Eigen::Index>(order[j + 1])) == scores(static_cast<Eigen::Index>(order[i])))
            ++j;
        double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    size_t n_pos = 0;
    for (size_t k = 0; k < n; ++k) {
        if (labels[k] == 1) {
            rank_sum_pos += rank[k];
            ++n_pos;
        }
    }
    size_t n_neg = n - n_pos;
    require(n_pos > 0 && n_neg > 0, "auroc: both classes must be present");
    return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc_ovr(const Matrix& scores, const std::vector<int>& labels) {
    require(scores.rows() == static_cast<Eigen::Index>(labels.size()), "auroc_ovr: row/label mismatch");
    require(scores.cols() >= 2, "auroc_ovr: need at least two classes");
    const int k_classes = static_cast<int>(scores.cols());

    std::vector<int> counts(static_cast<size_t>(k_classes), 0);
    for (int l : labels) {
        require(l >= 0 && l < k_classes, "auroc_ovr: label outside [0, K)");
        counts[static_cast<size_t>(l)] += 1;
    }
    for (int k = 0; k < k_classes; ++k)
        require(counts[static_cast<size_t>(k)] > 0,
                "auroc_ovr: class " + std::to_string(k) + " absent from labels");

    double total = 0.0;
    std::vector<int> binary(labels.size());
    for (int k = 0; k < k_classes; ++k) {
        for (size_t r = 0; r < labels.size(); ++r) binary[r] = labels[r] == k ? 1 : 0;
        total += auroc_binary(scores.col(k), binary);
    }
    return total / static_cast<double>(k_classes);
}

}  // namespace smc
