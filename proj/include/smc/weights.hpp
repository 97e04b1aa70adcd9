// Latent-space densities and instance-wise ensemble weights: refit each
// model's density over encoded samples, then map any feature vector to a
// point on the probability simplex plus a raw confidence scalar.

#ifndef SMC_WEIGHTS_HPP
#define SMC_WEIGHTS_HPP

#include "smc/representation.hpp"

namespace smc {

struct LatentDensitySet {
    std::vector<DensityModel> densities;  // latent-space KDEs, one per model
    int samples_per_model_used = 0;

    int size() const { return static_cast<int>(densities.size()); }
};

struct WeightVector {
    Vector weights;      // on the simplex
    double confidence;   // sum of raw latent densities, >= 0
};

// Latent refit: samples-variant information is encoded directly (the latent
// support is exactly the encoded information samples); moments-variant
// information is sampled n_samples times, encoded, and KDE-fit.
LatentDensitySet build_latent_densities(const LatentMap& map, const ModelBundle& bundle,
                                        Eigen::Index n_samples, RngStream& rng);

// The simplex arithmetic on raw density values: w_i = (p_i + gamma) / sum_j (p_j + gamma),
// confidence = sum_j p_j.
WeightVector weights_from_densities(const Vector& densities, double gamma);

WeightVector compute_weights(const LatentDensitySet& set, const LatentMap& map,
                             const Eigen::Ref<const Vector>& x, double gamma);

// Batch variant: one weight row per input row, confidences alongside.
void compute_weights_batch(const LatentDensitySet& set, const LatentMap& map, const Matrix& x,
                           double gamma, Matrix& weights, Vector& confidence);

// low-confidence iff confidence < tau.
bool low_confidence(const WeightVector& wv, double tau);

// Data-relative default threshold: the given percentile (0..100) of the
// confidence values over a reference dataset.
double confidence_percentile(const LatentDensitySet& set, const LatentMap& map, const Matrix& reference,
                             double gamma, double percentile);

}  // namespace smc

#endif  // SMC_WEIGHTS_HPP
