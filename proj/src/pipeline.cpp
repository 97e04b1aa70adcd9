#include "smc/pipeline.hpp"

namespace smc {

SmcFitResult fit_smc(const ModelBundle& bundle, const Dataset& test_data, const SmcFitConfig& config) {
    RngStream root(config.seed);

    const std::vector<DensityModel> densities = fit_feature_densities(bundle);

    TrainResult trained =
        train_representation(bundle, densities, test_data, config.train, root.derive("train"));

    SmcFitResult result;
    result.engine.map = std::move(trained.map);
    result.trace = std::move(trained.trace);

    RngStream refit_rng = root.derive("latent-refit");
    result.engine.latents =
        build_latent_densities(result.engine.map, bundle, config.weight.latent_refit_samples, refit_rng);
    result.engine.gamma = config.weight.gamma;
    result.engine.tau = confidence_percentile(result.engine.latents, result.engine.map,
                                              test_data.features(), config.weight.gamma,
                                              config.weight.tau_percentile);
    return result;
}

}  // namespace smc
