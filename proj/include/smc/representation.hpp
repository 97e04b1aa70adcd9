// Representation learning: the regularised reconstruction, connection and
// separation losses, end-to-end training of the encoder/decoder pair, and
// the loss-balancing ladder search.

#ifndef SMC_REPRESENTATION_HPP
#define SMC_REPRESENTATION_HPP

#include "smc/dataset.hpp"
#include "smc/expert.hpp"

#include <string>
#include <vector>

namespace smc {

// Encoder/decoder pair plus the input standardisation applied before
// encoding. Reconstruction error is measured in standardised space so that
// large-unit dimensions cannot dominate the loss.
struct LatentMap {
    Mlp encoder;  // d -> z, applied to standardised inputs
    Mlp decoder;  // z -> d, outputs in standardised space
    Vector mean;  // per-dimension standardisation
    Vector std;   // per-dimension, > 0

    int input_dim() const { return encoder.input_dim(); }
    int latent_dim() const { return encoder.output_dim(); }

    Vector standardise(const Eigen::Ref<const Vector>& x) const;
    Matrix standardise_batch(const Matrix& x) const;
    Vector encode(const Eigen::Ref<const Vector>& x) const;
    Matrix encode_batch(const Matrix& x) const;

    std::string to_json() const;
    static LatentMap from_json(const std::string& text);
};

// Gradients for both halves of a LatentMap.
struct MapGrads {
    Mlp::Grads enc;
    Mlp::Grads dec;

    static MapGrads zero(const LatentMap& map);
    void add(const MapGrads& other);
    void scale(double s);
};

struct LossWeights {
    double rec = 1.0;
    double con = 1.0;
    double sep = 1.0;
    double beta = 1e-3;  // latent L2 coefficient inside the reconstruction loss
};

struct SimilarityConfig {
    // Regression predictions are compared relative to this scale; when <= 0
    // the empirical prediction range of the current batch is used instead.
    double regression_scale = 0.0;
    double regression_scale_floor = 1e-6;
};

// 1 - D(a||b) with D the total-variation distance for classification and
// min(|a-b|/scale, 1) for regression. Always in [0, 1].
double predictive_similarity(const Prediction& a, const Prediction& b, double regression_scale);

// One draw of the per-step model dataset: samples_per_model points from each
// model's domain density, plus every model's prediction at every point.
struct ModelSampleBatch {
    Matrix points;                                      // n x d, raw feature space
    std::vector<int> provenance;                        // generating model per row
    std::vector<std::vector<Prediction>> predictions;   // [row][model]

    Eigen::Index size() const { return points.rows(); }

    static ModelSampleBatch draw(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                                 int samples_per_model, RngStream& rng);
};

// Sum over rows of ||decode(encode(x)) - x||^2 + beta * ||encode(x)||^2, in
// standardised space. Gradients (when requested) accumulate into *grads.
double loss_rec(const LatentMap& map, const Matrix& batch, double beta, MapGrads* grads);

// Sum over ordered row pairs (i, j) of
//   (1 - D(M_{m(i)}(x_i) || M_{m(j)}(x_i))) * ||encode(x_i) - encode(x_j)||^2.
// Both predictions are evaluated at the first row's point; the latent
// distance spans both rows.
double loss_con(const LatentMap& map, const ModelSampleBatch& batch, OutputKind kind,
                const SimilarityConfig& sim, MapGrads* grads);

// -1/2 * sum over ordered row pairs with different provenance of the squared
// latent distance.
double loss_sep(const LatentMap& map, const ModelSampleBatch& batch, MapGrads* grads);

struct TrainConfig {
    int steps = 3000;
    int latent_dim = 2;
    LossWeights weights;
    SimilarityConfig similarity;
    int samples_per_model = 1;  // 1..8
    int minibatch = 64;
    double lr = 1e-3;
    std::vector<int> hidden{64, 32};  // encoder d->64->32->z; decoder mirrored
    int standardisation_samples = 256;  // per model, drawn once before training
};

struct TraceRow {
    int step;
    double l_rec, l_con, l_sep, l_total;
};

struct TrainResult {
    LatentMap map;
    std::vector<TraceRow> trace;
};

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

TrainResult train_representation(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                                 const Dataset& test_data, const TrainConfig& config, RngStream rng);

struct BalanceResult {
    LossWeights weights;
    double l_rec_reference = 0.0;               // final reconstruction loss at lambda_con = lambda_sep = 0
    std::vector<double> ladder;                 // candidate multipliers tried
    std::vector<double> ladder_l_rec;           // their final reconstruction losses
    bool fell_back = false;                     // no candidate met the threshold
};

// Ladder search over joint connection/separation multipliers {1, 2, 4, 8}:
// largest multiplier whose retrained map keeps the final reconstruction loss
// within (1 + threshold) of the reference; falls back to equal weighting.
BalanceResult balance_losses(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                             const Dataset& test_data, const TrainConfig& base_config, double threshold,
                             const RngStream& rng);

}  // namespace smc

#endif  // SMC_REPRESENTATION_HPP
