#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"

#include "smc/pipeline.hpp"

#include <filesystem>

using smc::Dataset;
using smc::Matrix;
using smc::ModelBundle;
using smc::SmcEngine;
using smc::SmcFitConfig;
using smc::SmcFitResult;
using smc::Vector;

namespace {

SmcFitConfig tiny_config(std::uint64_t seed) {
    SmcFitConfig cfg;
    cfg.train.steps = 200;
    cfg.train.latent_dim = 1;
    cfg.train.hidden = {8, 4};
    cfg.train.minibatch = 8;
    cfg.train.standardisation_samples = 64;
    cfg.weight.latent_refit_samples = 32;
    cfg.seed = seed;
    return cfg;
}

Dataset grid_test() {
    Matrix x(48, 1);
    for (int i = 0; i < 48; ++i) x(i, 0) = -5.0 + 30.0 * i / 47.0;
    return Dataset(x);
}

}  // namespace

TEST_CASE("the end-to-end fit yields a usable engine") {
    const ModelBundle bundle = testutil::two_model_bundle(0.0, 20.0, 111);
    const Dataset test = grid_test();
    const SmcFitResult r = smc::fit_smc(bundle, test, tiny_config(3));

    CHECK(r.trace.size() == 200);
    REQUIRE(r.engine.latents.size() == 2);
    CHECK(std::isfinite(r.engine.tau));
    CHECK(r.engine.tau >= 0.0);
    CHECK(r.engine.gamma == 1e-9);

    Matrix w;
    Vector conf;
    smc::compute_weights_batch(r.engine.latents, r.engine.map, test.features(), r.engine.gamma, w, conf);
    int below = 0;
    for (Eigen::Index i = 0; i < conf.size(); ++i)
        if (conf(i) < r.engine.tau) ++below;
    // tau sits at the first percentile of these very confidences
    CHECK(static_cast<double>(below) / static_cast<double>(conf.size()) <= 0.05);

    // every weight row is a simplex point
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        CHECK(w.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w.row(i).minCoeff() >= 0.0);
    }

    // the two experts carry the regions around their own centres
    const smc::WeightVector at0 = smc::compute_weights(r.engine.latents, r.engine.map,
                                                       Vector::Constant(1, 0.0), r.engine.gamma);
    const smc::WeightVector at20 = smc::compute_weights(r.engine.latents, r.engine.map,
                                                        Vector::Constant(1, 20.0), r.engine.gamma);
    CHECK(at0.weights(0) > 0.5);
    CHECK(at20.weights(1) > 0.5);
}

TEST_CASE("a zero tau percentile flags nothing as low confidence") {
    const ModelBundle bundle = testutil::two_model_bundle(0.0, 20.0, 113);
    const Dataset test = grid_test();
    SmcFitConfig cfg = tiny_config(5);
    cfg.weight.tau_percentile = 0.0;
    const SmcFitResult r = smc::fit_smc(bundle, test, cfg);

    Matrix w;
    Vector conf;
    smc::compute_weights_batch(r.engine.latents, r.engine.map, test.features(), r.engine.gamma, w, conf);
    CHECK(r.engine.tau == conf.minCoeff());
    for (Eigen::Index i = 0; i < conf.size(); ++i) CHECK_FALSE(conf(i) < r.engine.tau);
}

TEST_CASE("fits are deterministic in the seed") {
    const ModelBundle bundle = testutil::two_model_bundle(0.0, 20.0, 127);
    const Dataset test = grid_test();
    const SmcFitResult a = smc::fit_smc(bundle, test, tiny_config(9));
    const SmcFitResult b = smc::fit_smc(bundle, test, tiny_config(9));
    CHECK(a.engine.to_json() == b.engine.to_json());
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].l_total == b.trace[i].l_total);

    const SmcFitResult c = smc::fit_smc(bundle, test, tiny_config(10));
    CHECK(a.engine.to_json() != c.engine.to_json());
}

TEST_CASE("a fitted engine survives the round trip to disk") {
    namespace fs = std::filesystem;
    const ModelBundle bundle = testutil::two_model_bundle(0.0, 20.0, 131);
    const Dataset test = grid_test();
    const SmcFitResult r = smc::fit_smc(bundle, test, tiny_config(13));

    const fs::path dir = fs::temp_directory_path() / "smc_test_pipeline";
    fs::create_directories(dir);
    const fs::path path = dir / "engine.json";
    r.engine.save(path.string());
    const SmcEngine loaded = SmcEngine::load(path.string());

    Matrix probe(5, 1);
    probe << -2.0, 3.0, 10.0, 16.0, 22.0;
    Matrix w0, w1;
    Vector c0, c1;
    smc::compute_weights_batch(r.engine.latents, r.engine.map, probe, r.engine.gamma, w0, c0);
    smc::compute_weights_batch(loaded.latents, loaded.map, probe, loaded.gamma, w1, c1);
    CHECK((w0 - w1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((c0 - c1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.tau == r.engine.tau);
}
