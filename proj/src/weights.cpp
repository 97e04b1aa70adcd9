#include "smc/weights.hpp"

#include <algorithm>

namespace smc {

LatentDensitySet build_latent_densities(const LatentMap& map, const ModelBundle& bundle,
                                        Eigen::Index n_samples, RngStream& rng) {
    require(n_samples >= 2, "build_latent_densities: need n_samples >= 2");
    require(bundle.dim() == map.input_dim(), "build_latent_densities: dimension mismatch");

    LatentDensitySet set;
    set.samples_per_model_used = static_cast<int>(n_samples);
    for (int j = 0; j < bundle.size(); ++j) {
        Matrix feature_points;
        if (bundle.info(j).is_samples()) {
            feature_points = bundle.info(j).samples();
        } else {
            RngStream mrng = rng.derive("latent-refit", static_cast<std::uint64_t>(j));
            feature_points = DensityModel::fit(bundle.info(j)).sample(mrng, n_samples);
        }
        const Matrix z = map.encode_batch(feature_points);
        require(all_finite(z), "build_latent_densities: non-finite encoding for model " + bundle.model(j).id());
        set.densities.push_back(DensityModel::fit_kde(z));
    }
    return set;
}

WeightVector weights_from_densities(const Vector& densities, double gamma) {
    require(densities.size() >= 1, "weights_from_densities: empty density vector");
    require(gamma > 0.0, "weights_from_densities: gamma must be > 0");
    require(densities.minCoeff() >= 0.0, "weights_from_densities: negative density");
    WeightVector wv;
    wv.confidence = densities.sum();
    const Vector shifted = densities.array() + gamma;
    wv.weights = shifted / shifted.sum();
    return wv;
}

WeightVector compute_weights(const LatentDensitySet& set, const LatentMap& map,
                             const Eigen::Ref<const Vector>& x, double gamma) {
    // Single queries go through the batch kernel so both entry points are
    // bit-identical for the same input.
    Matrix w;
    Vector conf;
    compute_weights_batch(set, map, x.transpose(), gamma, w, conf);
    WeightVector wv;
    wv.weights = w.row(0).transpose();
    wv.confidence = conf(0);
    return wv;
}

void compute_weights_batch(const LatentDensitySet& set, const LatentMap& map, const Matrix& x,
                           double gamma, Matrix& weights, Vector& confidence) {
    require(x.cols() == map.input_dim(), "compute_weights_batch: dimension mismatch");
    const Matrix z = map.encode_batch(x);
    require(all_finite(z), "compute_weights_batch: non-finite encoding");
    const Eigen::Index n = x.rows();
    const int n_models = set.size();
    Matrix p(n, n_models);
    for (int j = 0; j < n_models; ++j) {
        const Vector logd = set.densities[static_cast<size_t>(j)].log_density_batch(z);
        // scalar exp: SIMD exp rounds differently depending on batch length,
        // which would make a row's weights depend on its neighbours
        for (Eigen::Index i = 0; i < n; ++i) p(i, j) = std::exp(logd(i));
    }
    weights.resize(n, n_models);
    confidence.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const WeightVector wv = weights_from_densities(p.row(i).transpose(), gamma);
        weights.row(i) = wv.weights.transpose();
        confidence(i) = wv.confidence;
    }
}

bool low_confidence(const WeightVector& wv, double tau) {
    require(tau >= 0.0, "low_confidence: tau must be >= 0");
    return wv.confidence < tau;
}

double confidence_percentile(const LatentDensitySet& set, const LatentMap& map, const Matrix& reference,
                             double gamma, double percentile) {
    require(reference.rows() >= 1, "confidence_percentile: empty reference");
    require(percentile >= 0.0 && percentile <= 100.0, "confidence_percentile: percentile out of range");
    Matrix w;
    Vector conf;
    compute_weights_batch(set, map, reference, gamma, w, conf);
    std::vector<double> sorted(conf.data(), conf.data() + conf.size());
    std::sort(sorted.begin(), sorted.end());
    // Linear-interpolation quantile.
    const double pos = percentile / 100.0 * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace smc
