#pragma once

// Shared fixtures for the unit suites: hand-built latent maps, tiny expert
// bundles, and a finite-difference gradient checker.

#include "smc/expert.hpp"
#include "smc/representation.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

using smc::Matrix;
using smc::Vector;

// Encoder and decoder are single identity layers; standardisation is a no-op.
inline smc::LatentMap identity_map(int d) {
    smc::Layer lay;
    lay.weights = Matrix::Identity(d, d);
    lay.bias = Vector::Zero(d);
    lay.act = smc::Activation::Identity;
    smc::RngStream rng(7);
    smc::Mlp enc = smc::Mlp::make({d, d}, smc::Activation::Identity, rng);
    enc.layers()[0] = lay;
    smc::Mlp dec = smc::Mlp::make({d, d}, smc::Activation::Identity, rng);
    dec.layers()[0] = lay;
    smc::LatentMap map;
    map.encoder = std::move(enc);
    map.decoder = std::move(dec);
    map.mean = Vector::Zero(d);
    map.std = Vector::Ones(d);
    return map;
}

inline smc::LatentMap random_map(int d, int z, std::uint64_t seed) {
    smc::RngStream rng(seed);
    smc::RngStream erng = rng.derive("enc");
    smc::RngStream drng = rng.derive("dec");
    smc::LatentMap map;
    map.encoder = smc::Mlp::make({d, 4, z}, smc::Activation::Identity, erng);
    map.decoder = smc::Mlp::make({z, 4, d}, smc::Activation::Identity, drng);
    map.mean = Vector::Zero(d);
    map.std = Vector::Ones(d);
    return map;
}

// Same shape with identity hidden layers: smooth everywhere, so central
// finite differences are trustworthy (ReLU kinks break them at isolated
// parameter values). Parameter gradients still chain through both layers;
// activation derivatives get their own finite-difference coverage in the nn
// suite.
inline smc::LatentMap smooth_random_map(int d, int z, std::uint64_t seed) {
    smc::LatentMap map = random_map(d, z, seed);
    map.encoder.layers()[0].act = smc::Activation::Identity;
    map.decoder.layers()[0].act = smc::Activation::Identity;
    return map;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, smc::RngStream& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// Two 1-d experts backed by plain functions, with Gaussian-cloud sample info
// centred where each function is trustworthy.
inline smc::ModelBundle two_model_bundle(double c0, double c1, std::uint64_t seed, int info_n = 40) {
    smc::RngStream rng(seed);
    auto info_for = [&](double center, std::uint64_t idx) {
        smc::RngStream s = rng.derive("info", idx);
        Matrix m(info_n, 1);
        for (int i = 0; i < info_n; ++i) m(i, 0) = center + s.normal();
        return smc::ModelInfo::from_samples(m);
    };
    auto expert = [](const std::string& id, double slope, double bias) {
        return smc::ExpertModel(
            id, smc::OutputKind::Regression, 1, 0,
            [slope, bias](const Vector& x) { return smc::Prediction::regression(slope * x(0) + bias); }, 2);
    };
    std::vector<smc::ModelBundle::Entry> entries;
    entries.push_back({expert("m0", 1.0, 0.0), info_for(c0, 0)});
    entries.push_back({expert("m1", -1.0, 5.0), info_for(c1, 1)});
    return smc::ModelBundle(std::move(entries));
}

// Relative error used by every gradient check: |a - b| / max(1, |b|).
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// Central finite differences over every encoder/decoder parameter of `map`
// against the analytic gradients accumulated by `loss`. Returns the worst
// relative error seen.
inline double fd_worst_rel_err(smc::LatentMap& map,
                               const std::function<double(const smc::LatentMap&, smc::MapGrads*)>& loss,
                               double eps = 1e-5) {
    smc::MapGrads grads = smc::MapGrads::zero(map);
    (void)loss(map, &grads);
    double worst = 0.0;
    auto probe = [&](smc::Mlp& net, const smc::Mlp::Grads& g) {
        for (size_t l = 0; l < net.layers().size(); ++l) {
            Matrix& w = net.layers()[l].weights;
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c) {
                    const double save = w(r, c);
                    w(r, c) = save + eps;
                    const double up = loss(map, nullptr);
                    w(r, c) = save - eps;
                    const double dn = loss(map, nullptr);
                    w(r, c) = save;
                    worst = std::max(worst, rel_err(g.d_weights[l](r, c), (up - dn) / (2 * eps)));
                }
            Vector& b = net.layers()[l].bias;
            for (Eigen::Index r = 0; r < b.size(); ++r) {
                const double save = b(r);
                b(r) = save + eps;
                const double up = loss(map, nullptr);
                b(r) = save - eps;
                const double dn = loss(map, nullptr);
                b(r) = save;
                worst = std::max(worst, rel_err(g.d_bias[l](r), (up - dn) / (2 * eps)));
            }
        }
    };
    probe(map.encoder, grads.enc);
    probe(map.decoder, grads.dec);
    return worst;
}

}  // namespace testutil
