// Per-model domain densities: turn model information (feature samples or
// published moment statistics) into a sampleable, evaluable density, and
// refit densities over encoded samples in the latent space.

#ifndef SMC_DENSITY_HPP
#define SMC_DENSITY_HPP

#include "smc/common.hpp"
#include "smc/rng.hpp"

#include <string>
#include <vector>

namespace smc {

enum class DimKind { Continuous, Binary };

// One dimension of a moments-style information record.
struct MomentDim {
    DimKind kind = DimKind::Continuous;
    double mean = 0.0;  // continuous
    double std = 1.0;   // continuous, > 0
    double p = 0.5;     // binary, in [0, 1]
};

// What accompanies a released model: either raw feature samples or
// per-dimension summary statistics. Exactly one variant is populated.
class ModelInfo {
public:
    static ModelInfo from_samples(Matrix samples);
    static ModelInfo from_moments(std::vector<MomentDim> dims);

    bool is_samples() const { return samples_.size() > 0; }
    const Matrix& samples() const;
    const std::vector<MomentDim>& moments() const;
    Eigen::Index dim() const;

    // JSON: {"kind":"samples","data":[[...]]} or
    //       {"kind":"moments","dims":[{"type":"continuous","mean":..,"std":..},
    //                                 {"type":"binary","p":..}, ...]}
    std::string to_json() const;
    static ModelInfo from_json(const std::string& text);
    static ModelInfo load(const std::string& path);
    void save(const std::string& path) const;

private:
    ModelInfo() = default;
    Matrix samples_;
    std::vector<MomentDim> moments_;
};

// Fitted density: Gaussian-kernel KDE over support points, or a factorised
// Gaussian x Bernoulli product. Immutable after fit; log_density is pure.
class DensityModel {
public:
    enum class Kind { Kde, Factorised };

    // Gaussian KDE with per-dimension Scott bandwidth h_k = sigma_k * n^(-1/(d+4)).
    // n = 1 falls back to h = 1 per dimension; a zero-variance dimension gets
    // the 1e-3 floor and a warning on stderr.
    static DensityModel fit_kde(const Matrix& samples);
    // KDE with caller-chosen per-dimension bandwidths (all > 0); used when
    // restoring checkpoints and in tests that pin the bandwidth.
    static DensityModel kde_with_bandwidth(Matrix support, Vector bandwidth);
    static DensityModel fit_factorised(const std::vector<MomentDim>& dims);
    static DensityModel fit(const ModelInfo& info);

    Kind kind() const { return kind_; }
    Eigen::Index dim() const;

    // Natural-log density; zero density is reported as the kLogZero sentinel
    // rather than -inf so downstream weight arithmetic stays total.
    double log_density(const Eigen::Ref<const Vector>& x) const;
    Vector log_density_batch(const Matrix& x) const;

    Matrix sample(RngStream& rng, Eigen::Index count) const;

    // KDE accessors (invalid-call errors on factorised models).
    const Matrix& support() const;
    const Vector& bandwidth() const;
    const std::vector<MomentDim>& dims() const;

private:
    DensityModel() = default;
    Kind kind_ = Kind::Kde;
    Matrix support_;     // KDE
    Vector bandwidth_;   // KDE
    std::vector<MomentDim> dims_;  // factorised
};

}  // namespace smc

#endif  // SMC_DENSITY_HPP
