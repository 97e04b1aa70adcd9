// Prediction strategies: the instance-wise density-weighted combination and
// the fixed-weight comparison baselines.

#ifndef SMC_ENSEMBLES_HPP
#define SMC_ENSEMBLES_HPP

#include "smc/weights.hpp"

namespace smc {

// The fitted instance-wise weighting machinery, persistable as a checkpoint.
struct SmcEngine {
    LatentMap map;
    LatentDensitySet latents;
    double gamma = 1e-9;
    double tau = 0.0;  // low-confidence threshold over raw confidence

    std::string to_json() const;
    static SmcEngine from_json(const std::string& text);
    void save(const std::string& path) const;
    static SmcEngine load(const std::string& path);
};

enum class StrategyKind { Smc, SmcBma, GlobalAverage, MajorityVote, EntropyWeighted, Bma, Fixed };

struct EnsembleStrategy {
    StrategyKind kind = StrategyKind::Smc;
    Vector fixed_weights;  // Fixed / Bma (after bma_weights); on the simplex

    static EnsembleStrategy smc();
    static EnsembleStrategy smc_bma(Vector bma);
    static EnsembleStrategy global_average();
    static EnsembleStrategy majority_vote();
    static EnsembleStrategy entropy_weighted();
    static EnsembleStrategy fixed(Vector weights);
};

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

Prediction predict_smc(const ModelBundle& bundle, const SmcEngine& engine,
                       const Eigen::Ref<const Vector>& x, WeightVector* wv = nullptr);

Prediction predict_global_average(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x);

// Each member votes its argmax class; output is one-hot of the modal class,
// ties broken by the lowest class index.
Prediction predict_majority_vote(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x);

// weight_j proportional to exp(1 / max(H_j, eps_h)), entropies in nats,
// computed in log space so near-one-hot members do not overflow.
Prediction predict_entropy_weighted(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x,
                                    double eps_h = 1e-3);

Prediction predict_fixed(const ModelBundle& bundle, const Vector& weights,
                         const Eigen::Ref<const Vector>& x);

// Instance-wise weights averaged elementwise with a fixed vector, then
// renormalised.
Prediction predict_smc_bma(const ModelBundle& bundle, const SmcEngine& engine, const Vector& bma,
                           const Eigen::Ref<const Vector>& x, WeightVector* wv = nullptr);

// Information-criterion score per model on a labelled validation set:
// k_j * ln(n) - 2 * ln(max likelihood), Gaussian residuals for regression
// (MLE variance) and categorical likelihood for classification.
Vector bic_scores(const ModelBundle& bundle, const Dataset& validation);

// softmax(-bic / 2), computed in log space.
Vector bma_weights_from_bic(const Vector& bic);

Vector bma_weights(const ModelBundle& bundle, const Dataset& validation);

// One prediction row per input row (1 column for regression, K for
// classification). The engine is required for the instance-wise kinds.
Matrix predict_batch(const ModelBundle& bundle, const EnsembleStrategy& strategy, const SmcEngine* engine,
                     const Matrix& x);

}  // namespace smc

#endif  // SMC_ENSEMBLES_HPP
