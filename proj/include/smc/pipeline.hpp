// End-to-end pipeline: densities from information, representation training,
// latent refit, confidence threshold — producing a persistable engine.

#ifndef SMC_PIPELINE_HPP
#define SMC_PIPELINE_HPP

#include "smc/ensembles.hpp"

namespace smc {

struct WeightConfig {
    double gamma = 1e-9;
    Eigen::Index latent_refit_samples = 500;  // draws per moments-variant model
    double tau_percentile = 1.0;              // of confidence over the test features
};

struct SmcFitConfig {
    TrainConfig train;
    WeightConfig weight;
    std::uint64_t seed = 0;
};

struct SmcFitResult {
    SmcEngine engine;
    std::vector<TraceRow> trace;
};

SmcFitResult fit_smc(const ModelBundle& bundle, const Dataset& test_data, const SmcFitConfig& config);

}  // namespace smc

#endif  // SMC_PIPELINE_HPP
