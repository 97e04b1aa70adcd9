#include "smc/ensembles.hpp"

#include "json.hpp"

#include <fstream>

namespace smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SmcEngine persistence

std::string SmcEngine::to_json() const {
    json j;
    j["map"] = json::parse(map.to_json());
    j["gamma"] = gamma;
    j["tau"] = tau;
    j["samples_per_model_used"] = latents.samples_per_model_used;
    json dens = json::array();
    for (const DensityModel& d : latents.densities) {
        json dj;
        json support = json::array();
        for (Eigen::Index i = 0; i < d.support().rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < d.support().cols(); ++k) row.push_back(d.support()(i, k));
            support.push_back(std::move(row));
        }
        dj["support"] = std::move(support);
        dj["bandwidth"] = std::vector<double>(d.bandwidth().data(), d.bandwidth().data() + d.bandwidth().size());
        dens.push_back(std::move(dj));
    }
    j["latent_densities"] = std::move(dens);
    return j.dump(2);
}

SmcEngine SmcEngine::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("SmcEngine: JSON parse error: ") + e.what());
    }
    SmcEngine engine;
    engine.map = LatentMap::from_json(j.at("map").dump());
    engine.gamma = j.at("gamma").get<double>();
    engine.tau = j.at("tau").get<double>();
    engine.latents.samples_per_model_used = j.at("samples_per_model_used").get<int>();
    for (const json& dj : j.at("latent_densities")) {
        const json& rows = dj.at("support");
        require(rows.is_array() && !rows.empty(), "SmcEngine: empty latent support");
        const size_t z = rows[0].size();
        Matrix support(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(z));
        for (size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].size() == z, "SmcEngine: ragged latent support");
            for (size_t k = 0; k < z; ++k)
                support(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
        }
        const auto bw = dj.at("bandwidth").get<std::vector<double>>();
        require(bw.size() == z, "SmcEngine: bandwidth length mismatch");
        Vector bwv = Eigen::Map<const Vector>(bw.data(), static_cast<Eigen::Index>(bw.size()));
        engine.latents.densities.push_back(DensityModel::kde_with_bandwidth(std::move(support), std::move(bwv)));
    }
    return engine;
}

void SmcEngine::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "SmcEngine: cannot write " + path);
    out << to_json() << "\n";
}

SmcEngine SmcEngine::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "SmcEngine: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

// ---------------------------------------------------------------------------
// Strategies

EnsembleStrategy EnsembleStrategy::smc() { return EnsembleStrategy{StrategyKind::Smc, {}}; }
EnsembleStrategy EnsembleStrategy::smc_bma(Vector bma) { return EnsembleStrategy{StrategyKind::SmcBma, std::move(bma)}; }
EnsembleStrategy EnsembleStrategy::global_average() { return EnsembleStrategy{StrategyKind::GlobalAverage, {}}; }
EnsembleStrategy EnsembleStrategy::majority_vote() { return EnsembleStrategy{StrategyKind::MajorityVote, {}}; }
EnsembleStrategy EnsembleStrategy::entropy_weighted() { return EnsembleStrategy{StrategyKind::EntropyWeighted, {}}; }

EnsembleStrategy EnsembleStrategy::fixed(Vector weights) {
    require(weights.size() >= 1, "EnsembleStrategy::fixed: empty weights");
    require(weights.minCoeff() >= 0.0, "EnsembleStrategy::fixed: negative weight");
    require(std::abs(weights.sum() - 1.0) <= 1e-9, "EnsembleStrategy::fixed: weights must sum to 1");
    return EnsembleStrategy{StrategyKind::Fixed, std::move(weights)};
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Smc: return "smc";
        case StrategyKind::SmcBma: return "smc-bma";
        case StrategyKind::GlobalAverage: return "global-average";
        case StrategyKind::MajorityVote: return "majority-vote";
        case StrategyKind::EntropyWeighted: return "entropy-weighted";
        case StrategyKind::Bma: return "bma";
        case StrategyKind::Fixed: return "fixed";
    }
    throw std::invalid_argument("strategy_name: unknown kind");
}

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "smc") return StrategyKind::Smc;
    if (name == "smc-bma") return StrategyKind::SmcBma;
    if (name == "global-average") return StrategyKind::GlobalAverage;
    if (name == "majority-vote") return StrategyKind::MajorityVote;
    if (name == "entropy-weighted") return StrategyKind::EntropyWeighted;
    if (name == "bma") return StrategyKind::Bma;
    if (name == "fixed") return StrategyKind::Fixed;
    throw std::invalid_argument("unknown strategy \"" + name + "\"");
}

namespace {

// Convex combination of the bundle's predictions at x. Classification
// outputs are renormalised against accumulated float error.
Prediction combine(const ModelBundle& bundle, const Vector& weights, const Eigen::Ref<const Vector>& x) {
    require(weights.size() == bundle.size(), "combine: weight count mismatch");
    if (bundle.output_kind() == OutputKind::Regression) {
        double y = 0.0;
        for (int j = 0; j < bundle.size(); ++j) y += weights(j) * bundle.model(j).predict(x).scalar();
        return Prediction::regression(y);
    }
    Vector probs = Vector::Zero(bundle.num_classes());
    for (int j = 0; j < bundle.size(); ++j) probs += weights(j) * bundle.model(j).predict(x).probs();
    probs = probs.cwiseMax(0.0);
    probs /= probs.sum();
    return Prediction::classification(probs);
}

int argmax_lowest(const Vector& v) {
    int best = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k)
        if (v(k) > v(best)) best = static_cast<int>(k);
    return best;
}

}  // namespace

Prediction predict_smc(const ModelBundle& bundle, const SmcEngine& engine,
                       const Eigen::Ref<const Vector>& x, WeightVector* wv) {
    require(engine.latents.size() == bundle.size(), "predict_smc: engine/bundle model count mismatch");
    WeightVector w = compute_weights(engine.latents, engine.map, x, engine.gamma);
    if (wv) *wv = w;
    return combine(bundle, w.weights, x);
}

Prediction predict_global_average(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x) {
    return combine(bundle, Vector::Constant(bundle.size(), 1.0 / bundle.size()), x);
}

Prediction predict_majority_vote(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x) {
    require(bundle.output_kind() == OutputKind::Classification,
            "predict_majority_vote: classification bundles only");
    Eigen::VectorXi votes = Eigen::VectorXi::Zero(bundle.num_classes());
    for (int j = 0; j < bundle.size(); ++j) votes(argmax_lowest(bundle.model(j).predict(x).probs()))++;
    int modal = 0;
    for (int k = 1; k < bundle.num_classes(); ++k)
        if (votes(k) > votes(modal)) modal = k;  // ties keep the lowest index
    Vector probs = Vector::Zero(bundle.num_classes());
    probs(modal) = 1.0;
    return Prediction::classification(probs);
}

Prediction predict_entropy_weighted(const ModelBundle& bundle, const Eigen::Ref<const Vector>& x,
                                    double eps_h) {
    require(bundle.output_kind() == OutputKind::Classification,
            "predict_entropy_weighted: classification bundles only");
    require(eps_h > 0.0, "predict_entropy_weighted: eps_h must be > 0");
    std::vector<Vector> preds;
    Vector log_w(bundle.size());
    for (int j = 0; j < bundle.size(); ++j) {
        preds.push_back(bundle.model(j).predict(x).probs());
        double h = 0.0;
        for (Eigen::Index k = 0; k < preds.back().size(); ++k) {
            const double p = preds.back()(k);
            if (p > 0.0) h -= p * std::log(p);
        }
        log_w(j) = 1.0 / std::max(h, eps_h);
    }
    const Vector w = (log_w.array() - log_w.maxCoeff()).exp();
    Vector probs = Vector::Zero(bundle.num_classes());
    for (int j = 0; j < bundle.size(); ++j) probs += (w(j) / w.sum()) * preds[static_cast<size_t>(j)];
    probs = probs.cwiseMax(0.0);
    probs /= probs.sum();
    return Prediction::classification(probs);
}

Prediction predict_fixed(const ModelBundle& bundle, const Vector& weights,
                         const Eigen::Ref<const Vector>& x) {
    return combine(bundle, weights, x);
}

Prediction predict_smc_bma(const ModelBundle& bundle, const SmcEngine& engine, const Vector& bma,
                           const Eigen::Ref<const Vector>& x, WeightVector* wv) {
    require(bma.size() == bundle.size(), "predict_smc_bma: weight count mismatch");
    WeightVector w = compute_weights(engine.latents, engine.map, x, engine.gamma);
    Vector mixed = 0.5 * (w.weights + bma);
    mixed /= mixed.sum();
    if (wv) {
        wv->weights = mixed;
        wv->confidence = w.confidence;
    }
    return combine(bundle, mixed, x);
}

// ---------------------------------------------------------------------------
// Information-criterion baseline

Vector bic_scores(const ModelBundle& bundle, const Dataset& validation) {
    require(validation.has_targets(), "bic_scores: validation set needs targets");
    require(validation.size() >= 1, "bic_scores: empty validation set");
    require(validation.dim() == bundle.dim(), "bic_scores: dimension mismatch");
    const Eigen::Index n = validation.size();
    const double ln_n = std::log(static_cast<double>(n));

    Vector bic(bundle.size());
    for (int j = 0; j < bundle.size(); ++j) {
        const ExpertModel& model = bundle.model(j);
        double log_lik;
        if (bundle.output_kind() == OutputKind::Regression) {
            double ss = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double e = model.predict(validation.row(i)).scalar() - validation.targets()(i);
                ss += e * e;
            }
            // Gaussian likelihood at the MLE residual variance, floored so a
            // perfect fit stays finite.
            const double var = std::max(ss / static_cast<double>(n), 1e-12);
            log_lik = -0.5 * static_cast<double>(n) * (std::log(2.0 * kPi * var) + 1.0);
        } else {
            log_lik = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int label = static_cast<int>(validation.targets()(i));
                require(label >= 0 && label < bundle.num_classes(), "bic_scores: label out of range");
                const double p = std::max(model.predict(validation.row(i)).probs()(label), 1e-12);
                log_lik += std::log(p);
            }
        }
        bic(j) = model.param_count() * ln_n - 2.0 * log_lik;
    }
    return bic;
}

Vector bma_weights_from_bic(const Vector& bic) {
    require(bic.size() >= 1, "bma_weights_from_bic: empty scores");
    const Vector log_w = -0.5 * bic.array();
    const Vector shifted = (log_w.array() - log_w.maxCoeff()).exp();
    return shifted / shifted.sum();
}

Vector bma_weights(const ModelBundle& bundle, const Dataset& validation) {
    return bma_weights_from_bic(bic_scores(bundle, validation));
}

// ---------------------------------------------------------------------------
// Batch prediction

Matrix predict_batch(const ModelBundle& bundle, const EnsembleStrategy& strategy, const SmcEngine* engine,
                     const Matrix& x) {
    const bool needs_engine = strategy.kind == StrategyKind::Smc || strategy.kind == StrategyKind::SmcBma;
    require(!needs_engine || engine != nullptr, "predict_batch: strategy requires a fitted engine");
    const Eigen::Index cols = bundle.output_kind() == OutputKind::Regression ? 1 : bundle.num_classes();
    Matrix out(x.rows(), cols);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vector xi = x.row(i).transpose();
        Prediction p = [&] {
            switch (strategy.kind) {
                case StrategyKind::Smc: return predict_smc(bundle, *engine, xi);
                case StrategyKind::SmcBma: return predict_smc_bma(bundle, *engine, strategy.fixed_weights, xi);
                case StrategyKind::GlobalAverage: return predict_global_average(bundle, xi);
                case StrategyKind::MajorityVote: return predict_majority_vote(bundle, xi);
                case StrategyKind::EntropyWeighted: return predict_entropy_weighted(bundle, xi);
                case StrategyKind::Bma:
                case StrategyKind::Fixed: return predict_fixed(bundle, strategy.fixed_weights, xi);
            }
            throw std::invalid_argument("predict_batch: unknown strategy");
        }();
        out.row(i) = p.value().transpose();
    }
    return out;
}

}  // namespace smc
