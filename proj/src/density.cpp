#include "smc/density.hpp"

#include "smc/kernels.hpp"

#include "json.hpp"

#include <fstream>
#include <iostream>

namespace smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ModelInfo

ModelInfo ModelInfo::from_samples(Matrix samples) {
    require(samples.rows() >= 1, "ModelInfo: need at least one sample");
    require(samples.cols() >= 1, "ModelInfo: need at least one dimension");
    require(all_finite(samples), "ModelInfo: non-finite sample entries");
    ModelInfo info;
    info.samples_ = std::move(samples);
    return info;
}

ModelInfo ModelInfo::from_moments(std::vector<MomentDim> dims) {
    require(!dims.empty(), "ModelInfo: need at least one dimension");
    for (size_t k = 0; k < dims.size(); ++k) {
        const MomentDim& m = dims[k];
        if (m.kind == DimKind::Continuous) {
            require(std::isfinite(m.mean) && std::isfinite(m.std), "ModelInfo: non-finite moments in dim " + std::to_string(k));
            require(m.std > 0.0, "ModelInfo: std must be > 0 in dim " + std::to_string(k));
        } else {
            require(m.p >= 0.0 && m.p <= 1.0, "ModelInfo: bernoulli p outside [0,1] in dim " + std::to_string(k));
        }
    }
    ModelInfo info;
    info.moments_ = std::move(dims);
    return info;
}

const Matrix& ModelInfo::samples() const {
    require(is_samples(), "ModelInfo: not a samples variant");
    return samples_;
}

const std::vector<MomentDim>& ModelInfo::moments() const {
    require(!is_samples(), "ModelInfo: not a moments variant");
    return moments_;
}

Eigen::Index ModelInfo::dim() const {
    return is_samples() ? samples_.cols() : static_cast<Eigen::Index>(moments_.size());
}

std::string ModelInfo::to_json() const {
    json j;
    if (is_samples()) {
        j["kind"] = "samples";
        json rows = json::array();
        for (Eigen::Index i = 0; i < samples_.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < samples_.cols(); ++k) row.push_back(samples_(i, k));
            rows.push_back(std::move(row));
        }
        j["data"] = std::move(rows);
    } else {
        j["kind"] = "moments";
        json dims = json::array();
        for (const MomentDim& m : moments_) {
            if (m.kind == DimKind::Continuous)
                dims.push_back({{"type", "continuous"}, {"mean", m.mean}, {"std", m.std}});
            else
                dims.push_back({{"type", "binary"}, {"p", m.p}});
        }
        j["dims"] = std::move(dims);
    }
    return j.dump(2);
}

ModelInfo ModelInfo::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("ModelInfo: JSON parse error: ") + e.what());
    }
    require(j.contains("kind") && j["kind"].is_string(), "ModelInfo: missing \"kind\"");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "samples") {
        require(j.contains("data") && j["data"].is_array() && !j["data"].empty(), "ModelInfo: missing sample data");
        const json& rows = j["data"];
        const size_t d = rows[0].size();
        require(d >= 1, "ModelInfo: empty sample rows");
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].is_array() && rows[i].size() == d, "ModelInfo: ragged sample rows");
            for (size_t k = 0; k < d; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
        }
        return from_samples(std::move(m));
    }
    if (kind == "moments") {
        require(j.contains("dims") && j["dims"].is_array() && !j["dims"].empty(), "ModelInfo: missing dims");
        std::vector<MomentDim> dims;
        for (const json& dj : j["dims"]) {
            require(dj.contains("type") && dj["type"].is_string(), "ModelInfo: dim missing \"type\"");
            MomentDim m;
            const std::string type = dj["type"].get<std::string>();
            if (type == "continuous") {
                m.kind = DimKind::Continuous;
                m.mean = dj.at("mean").get<double>();
                m.std = dj.at("std").get<double>();
            } else if (type == "binary") {
                m.kind = DimKind::Binary;
                m.p = dj.at("p").get<double>();
            } else {
                throw std::invalid_argument("ModelInfo: unknown dim type \"" + type + "\"");
            }
            dims.push_back(m);
        }
        return from_moments(std::move(dims));
    }
    throw std::invalid_argument("ModelInfo: unknown kind \"" + kind + "\"");
}

ModelInfo ModelInfo::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "ModelInfo: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

void ModelInfo::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "ModelInfo: cannot write " + path);
    out << to_json() << "\n";
}

// ---------------------------------------------------------------------------
// DensityModel

DensityModel DensityModel::fit_kde(const Matrix& samples) {
    require(samples.rows() >= 1, "fit_kde: need at least one sample");
    require(all_finite(samples), "fit_kde: non-finite samples");
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();

    DensityModel model;
    model.kind_ = Kind::Kde;
    model.support_ = samples;
    model.bandwidth_.resize(d);

    if (n == 1) {
        // Scott's rule is undefined for a single point; unit bandwidth.
        model.bandwidth_.setOnes();
        return model;
    }

    const double scott = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
    for (Eigen::Index k = 0; k < d; ++k) {
        const double mean = samples.col(k).mean();
        const double var = (samples.col(k).array() - mean).square().sum() / static_cast<double>(n - 1);
        const double sigma = std::sqrt(var);
        const double floor = 1e-3 * (sigma > 0.0 ? sigma : 1.0);
        double h = sigma * scott;
        if (h < floor) {
            std::cerr << "warning: fit_kde: dimension " << k
                      << " has (near-)zero variance; bandwidth floored at " << floor << "\n";
            h = floor;
        }
        model.bandwidth_(k) = h;
    }
    return model;
}

DensityModel DensityModel::kde_with_bandwidth(Matrix support, Vector bandwidth) {
    require(support.rows() >= 1, "kde_with_bandwidth: need at least one support point");
    require(all_finite(support), "kde_with_bandwidth: non-finite support");
    require(bandwidth.size() == support.cols(), "kde_with_bandwidth: bandwidth length mismatch");
    require(bandwidth.minCoeff() > 0.0, "kde_with_bandwidth: bandwidths must be > 0");
    DensityModel model;
    model.kind_ = Kind::Kde;
    model.support_ = std::move(support);
    model.bandwidth_ = std::move(bandwidth);
    return model;
}

DensityModel DensityModel::fit_factorised(const std::vector<MomentDim>& dims) {
    // Route validation through ModelInfo so both entry points agree.
    ModelInfo::from_moments(dims);
    DensityModel model;
    model.kind_ = Kind::Factorised;
    model.dims_ = dims;
    return model;
}

DensityModel DensityModel::fit(const ModelInfo& info) {
    return info.is_samples() ? fit_kde(info.samples()) : fit_factorised(info.moments());
}

Eigen::Index DensityModel::dim() const {
    return kind_ == Kind::Kde ? support_.cols() : static_cast<Eigen::Index>(dims_.size());
}

const Matrix& DensityModel::support() const {
    require(kind_ == Kind::Kde, "DensityModel: support() on a factorised model");
    return support_;
}

const Vector& DensityModel::bandwidth() const {
    require(kind_ == Kind::Kde, "DensityModel: bandwidth() on a factorised model");
    return bandwidth_;
}

const std::vector<MomentDim>& DensityModel::dims() const {
    require(kind_ == Kind::Factorised, "DensityModel: dims() on a KDE model");
    return dims_;
}

namespace {

double factorised_log_density(const std::vector<MomentDim>& dims, const Eigen::Ref<const Vector>& x) {
    double total = 0.0;
    for (size_t k = 0; k < dims.size(); ++k) {
        const MomentDim& m = dims[k];
        const double v = x(static_cast<Eigen::Index>(k));
        if (m.kind == DimKind::Continuous) {
            const double u = (v - m.mean) / m.std;
            total += -0.5 * u * u - std::log(m.std * std::sqrt(2.0 * kPi));
        } else {
            require(v == 0.0 || v == 1.0,
                    "log_density: binary dimension " + std::to_string(k) + " must be 0 or 1");
            const double pmf = v == 1.0 ? m.p : 1.0 - m.p;
            total += pmf > 0.0 ? std::log(pmf) : kLogZero;
        }
    }
    return total < kLogZero ? kLogZero : total;
}

}  // namespace

double DensityModel::log_density(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == dim(), "log_density: dimension mismatch");
    if (kind_ == Kind::Factorised) return factorised_log_density(dims_, x);
    Matrix q(1, x.size());
    q.row(0) = x.transpose();
    return kernels::kde_log_density_batch(q, support_, bandwidth_)(0);
}

Vector DensityModel::log_density_batch(const Matrix& x) const {
    require(x.cols() == dim(), "log_density_batch: dimension mismatch");
    if (kind_ == Kind::Kde) return kernels::kde_log_density_batch(x, support_, bandwidth_);
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = factorised_log_density(dims_, x.row(i).transpose());
    return out;
}

Matrix DensityModel::sample(RngStream& rng, Eigen::Index count) const {
    require(count >= 1, "sample: count must be >= 1");
    const Eigen::Index d = dim();
    Matrix out(count, d);
    if (kind_ == Kind::Kde) {
        const int n = static_cast<int>(support_.rows());
        for (Eigen::Index i = 0; i < count; ++i) {
            const int pick = rng.uniform_int(n);
            for (Eigen::Index k = 0; k < d; ++k)
                out(i, k) = support_(pick, k) + bandwidth_(k) * rng.normal();
        }
    } else {
        for (Eigen::Index i = 0; i < count; ++i) {
            for (Eigen::Index k = 0; k < d; ++k) {
                const MomentDim& m = dims_[static_cast<size_t>(k)];
                out(i, k) = m.kind == DimKind::Continuous ? m.mean + m.std * rng.normal()
                                                          : (rng.bernoulli(m.p) ? 1.0 : 0.0);
            }
        }
    }
    return out;
}

}  // namespace smc
