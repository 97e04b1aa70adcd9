#include "smc/representation.hpp"

#include "smc/kernels.hpp"

#include "json.hpp"

#include <fstream>
#include <limits>

namespace smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// LatentMap

Vector LatentMap::standardise(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == mean.size(), "LatentMap: dimension mismatch");
    return (x - mean).cwiseQuotient(std);
}

Matrix LatentMap::standardise_batch(const Matrix& x) const {
    require(x.cols() == mean.size(), "LatentMap: dimension mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Vector LatentMap::encode(const Eigen::Ref<const Vector>& x) const {
    return encoder.forward(standardise(x));
}

Matrix LatentMap::encode_batch(const Matrix& x) const {
    return kernels::mlp_forward_batch(encoder, standardise_batch(x));
}

std::string LatentMap::to_json() const {
    json j;
    j["encoder"] = json::parse(encoder.to_json());
    j["decoder"] = json::parse(decoder.to_json());
    j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    j["std"] = std::vector<double>(std.data(), std.data() + std.size());
    return j.dump(2);
}

LatentMap LatentMap::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("LatentMap: JSON parse error: ") + e.what());
    }
    LatentMap map;
    map.encoder = Mlp::from_json(j.at("encoder").dump());
    map.decoder = Mlp::from_json(j.at("decoder").dump());
    const auto mv = j.at("mean").get<std::vector<double>>();
    const auto sv = j.at("std").get<std::vector<double>>();
    require(mv.size() == sv.size() && !mv.empty(), "LatentMap: bad standardisation arrays");
    map.mean = Eigen::Map<const Vector>(mv.data(), static_cast<Eigen::Index>(mv.size()));
    map.std = Eigen::Map<const Vector>(sv.data(), static_cast<Eigen::Index>(sv.size()));
    require(map.std.minCoeff() > 0.0, "LatentMap: standardisation stds must be > 0");
    require(map.encoder.input_dim() == static_cast<int>(mv.size()), "LatentMap: encoder/standardisation mismatch");
    require(map.decoder.output_dim() == map.encoder.input_dim() &&
                map.decoder.input_dim() == map.encoder.output_dim(),
            "LatentMap: encoder/decoder dims inconsistent");
    return map;
}

// ---------------------------------------------------------------------------
// MapGrads

MapGrads MapGrads::zero(const LatentMap& map) {
    return MapGrads{map.encoder.zero_grads(), map.decoder.zero_grads()};
}

void MapGrads::add(const MapGrads& other) {
    enc.add(other.enc);
    dec.add(other.dec);
}

void MapGrads::scale(double s) {
    enc.scale(s);
    dec.scale(s);
}

// ---------------------------------------------------------------------------
// Predictive similarity

double predictive_similarity(const Prediction& a, const Prediction& b, double regression_scale) {
    require(a.kind() == b.kind(), "predictive_similarity: output kinds differ");
    double d;
    if (a.kind() == OutputKind::Classification) {
        require(a.probs().size() == b.probs().size(), "predictive_similarity: class counts differ");
        d = 0.5 * (a.probs() - b.probs()).cwiseAbs().sum();  // total variation
    } else {
        require(regression_scale > 0.0, "predictive_similarity: regression scale must be > 0");
        d = std::min(std::abs(a.scalar() - b.scalar()) / regression_scale, 1.0);
    }
    return 1.0 - d;
}

// ---------------------------------------------------------------------------
// ModelSampleBatch

ModelSampleBatch ModelSampleBatch::draw(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                                        int samples_per_model, RngStream& rng) {
    require(static_cast<int>(densities.size()) == bundle.size(), "ModelSampleBatch: density count mismatch");
    require(samples_per_model >= 1, "ModelSampleBatch: samples_per_model must be >= 1");
    const int n_models = bundle.size();
    const Eigen::Index n = static_cast<Eigen::Index>(n_models) * samples_per_model;

    ModelSampleBatch batch;
    batch.points.resize(n, bundle.dim());
    batch.provenance.resize(static_cast<size_t>(n));
    for (int j = 0; j < n_models; ++j) {
        RngStream mrng = rng.derive("model-sample", static_cast<std::uint64_t>(j));
        const Matrix draws = densities[static_cast<size_t>(j)].sample(mrng, samples_per_model);
        for (int s = 0; s < samples_per_model; ++s) {
            const Eigen::Index row = static_cast<Eigen::Index>(j) * samples_per_model + s;
            batch.points.row(row) = draws.row(s);
            batch.provenance[static_cast<size_t>(row)] = j;
        }
    }

    batch.predictions.resize(static_cast<size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        auto& row_preds = batch.predictions[static_cast<size_t>(r)];
        row_preds.reserve(static_cast<size_t>(n_models));
        const Vector x = batch.points.row(r).transpose();
        for (int k = 0; k < n_models; ++k) row_preds.push_back(bundle.model(k).predict(x));
    }
    return batch;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

struct RowAcc {
    double value = 0.0;
    MapGrads grads;
    bool with_grads = false;
};

// Encode every batch row, keeping tapes when gradients are requested.
void encode_rows(const LatentMap& map, const Matrix& raw, Matrix& z, std::vector<Mlp::Tape>* tapes) {
    const Matrix s = map.standardise_batch(raw);
    z.resize(s.rows(), map.latent_dim());
    if (tapes) tapes->resize(static_cast<size_t>(s.rows()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        if (tapes)
            z.row(i) = map.encoder.forward(s.row(i).transpose(), (*tapes)[static_cast<size_t>(i)]).transpose();
        else
            z.row(i) = map.encoder.forward(s.row(i).transpose()).transpose();
    }
}

// Backpropagate per-row latent gradients through the encoder, accumulating
// parameter gradients deterministically (fixed blocks merged in index order).
void backprop_latent(const LatentMap& map, const std::vector<Mlp::Tape>& tapes, const Matrix& d_z,
                     MapGrads* grads) {
    if (!grads) return;
    RowAcc total = kernels::blocked_row_reduce<RowAcc>(
        d_z.rows(),
        [&] { return RowAcc{0.0, MapGrads::zero(map), true}; },
        [&](RowAcc& acc, Eigen::Index i) {
            map.encoder.backward(tapes[static_cast<size_t>(i)], d_z.row(i).transpose(), acc.grads.enc);
        },
        [](RowAcc& t, const RowAcc& b) { t.grads.add(b.grads); });
    grads->add(total.grads);
}

}  // namespace

double loss_rec(const LatentMap& map, const Matrix& batch, double beta, MapGrads* grads) {
    require(batch.cols() == map.input_dim(), "loss_rec: dimension mismatch");
    require(beta >= 0.0, "loss_rec: beta must be >= 0");
    const Matrix s = map.standardise_batch(batch);

    RowAcc total = kernels::blocked_row_reduce<RowAcc>(
        s.rows(),
        [&] {
            RowAcc a;
            a.with_grads = grads != nullptr;
            if (a.with_grads) a.grads = MapGrads::zero(map);
            return a;
        },
        [&](RowAcc& acc, Eigen::Index i) {
            const Vector x = s.row(i).transpose();
            if (!acc.with_grads) {
                const Vector z = map.encoder.forward(x);
                const Vector r = map.decoder.forward(z);
                acc.value += (r - x).squaredNorm() + beta * z.squaredNorm();
                return;
            }
            Mlp::Tape enc_tape, dec_tape;
            const Vector z = map.encoder.forward(x, enc_tape);
            const Vector r = map.decoder.forward(z, dec_tape);
            acc.value += (r - x).squaredNorm() + beta * z.squaredNorm();
            const Vector d_r = 2.0 * (r - x);
            Vector d_z = map.decoder.backward(dec_tape, d_r, acc.grads.dec);
            d_z += 2.0 * beta * z;
            map.encoder.backward(enc_tape, d_z, acc.grads.enc);
        },
        [](RowAcc& t, const RowAcc& b) {
            t.value += b.value;
            if (t.with_grads) t.grads.add(b.grads);
        });

    if (grads) grads->add(total.grads);
    if (!std::isfinite(total.value)) throw NumericalError("loss_rec: non-finite value");
    return total.value;
}

namespace {

void check_prediction_cache(const ModelSampleBatch& batch) {
    const size_t n = static_cast<size_t>(batch.size());
    require(batch.provenance.size() == n, "model sample batch: provenance length mismatch");
    require(batch.predictions.size() == n, "model sample batch: prediction cache missing");
    for (size_t r = 0; r < n; ++r) {
        require(!batch.predictions[r].empty(), "model sample batch: empty prediction row");
        require(batch.predictions[r].size() == batch.predictions[0].size(),
                "model sample batch: ragged prediction cache");
        require(batch.provenance[r] >= 0 &&
                    batch.provenance[r] < static_cast<int>(batch.predictions[r].size()),
                "model sample batch: provenance index out of range");
    }
}

double pair_loss(const LatentMap& map, const ModelSampleBatch& batch, const Matrix& coeff, MapGrads* grads) {
    Matrix z;
    std::vector<Mlp::Tape> tapes;
    encode_rows(map, batch.points, z, grads ? &tapes : nullptr);
    Matrix d_z;
    const double value = kernels::weighted_pair_sqdist(z, coeff, grads ? &d_z : nullptr);
    backprop_latent(map, tapes, d_z, grads);
    if (!std::isfinite(value)) throw NumericalError("pairwise latent loss: non-finite value");
    return value;
}

}  // namespace

double loss_con(const LatentMap& map, const ModelSampleBatch& batch, OutputKind kind,
                const SimilarityConfig& sim, MapGrads* grads) {
    check_prediction_cache(batch);
    const Eigen::Index n = batch.size();

    double scale = sim.regression_scale;
    if (kind == OutputKind::Regression && scale <= 0.0) {
        // Empirical prediction range over the whole cache, floored.
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& row : batch.predictions)
            for (const Prediction& p : row) {
                lo = std::min(lo, p.scalar());
                hi = std::max(hi, p.scalar());
            }
        scale = std::max(hi - lo, sim.regression_scale_floor);
    }

    Matrix coeff(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& preds = batch.predictions[static_cast<size_t>(r)];
        const Prediction& own = preds[static_cast<size_t>(batch.provenance[static_cast<size_t>(r)])];
        for (Eigen::Index q = 0; q < n; ++q) {
            const Prediction& other = preds[static_cast<size_t>(batch.provenance[static_cast<size_t>(q)])];
            coeff(r, q) = predictive_similarity(own, other, scale);
        }
    }
    return pair_loss(map, batch, coeff, grads);
}

double loss_sep(const LatentMap& map, const ModelSampleBatch& batch, MapGrads* grads) {
    const Eigen::Index n = batch.size();
    require(batch.provenance.size() == static_cast<size_t>(n), "loss_sep: provenance length mismatch");
    Matrix coeff(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index q = 0; q < n; ++q)
            coeff(r, q) = batch.provenance[static_cast<size_t>(r)] != batch.provenance[static_cast<size_t>(q)]
                              ? -0.5
                              : 0.0;
    return pair_loss(map, batch, coeff, grads);
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Standardisation statistics over the test features plus a fixed draw from
// every model density, so both loss summation sets live on a common scale.
void fit_standardisation(const std::vector<DensityModel>& densities, const Dataset& test_data,
                         int samples_per_model, RngStream& rng, Vector& mean, Vector& std_out) {
    const Eigen::Index d = test_data.dim();
    std::vector<Matrix> parts;
    parts.push_back(test_data.features());
    for (size_t j = 0; j < densities.size(); ++j) {
        RngStream mrng = rng.derive("standardise", static_cast<std::uint64_t>(j));
        parts.push_back(densities[j].sample(mrng, samples_per_model));
    }
    Eigen::Index rows = 0;
    for (const Matrix& p : parts) rows += p.rows();
    Matrix all(rows, d);
    Eigen::Index at = 0;
    for (const Matrix& p : parts) {
        all.middleRows(at, p.rows()) = p;
        at += p.rows();
    }
    mean = all.colwise().mean();
    std_out.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double var = (all.col(k).array() - mean(k)).square().sum() / static_cast<double>(all.rows() - 1);
        const double s = std::sqrt(var);
        std_out(k) = s > 1e-12 ? s : 1.0;
    }
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    require(out.good(), "write_trace_csv: cannot write " + path);
    out << "step,l_rec,l_con,l_sep,l_total\n";
    for (const TraceRow& row : trace)
        out << row.step << ',' << format_double(row.l_rec) << ',' << format_double(row.l_con) << ','
            << format_double(row.l_sep) << ',' << format_double(row.l_total) << '\n';
}

TrainResult train_representation(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                                 const Dataset& test_data, const TrainConfig& config, RngStream rng) {
    require(static_cast<int>(densities.size()) == bundle.size(), "train_representation: density count mismatch");
    require(test_data.dim() == bundle.dim(), "train_representation: test data dimension mismatch");
    require(config.steps >= 0, "train_representation: steps must be >= 0");
    require(config.latent_dim >= 1, "train_representation: latent_dim must be >= 1");
    require(config.samples_per_model >= 1 && config.samples_per_model <= 8,
            "train_representation: samples_per_model must be in [1, 8]");
    require(config.minibatch >= 1, "train_representation: minibatch must be >= 1");

    LatentMap map;
    {
        RngStream srng = rng.derive("standardisation");
        fit_standardisation(densities, test_data, config.standardisation_samples, srng, map.mean, map.std);
    }
    const int d = static_cast<int>(bundle.dim());
    std::vector<int> enc_dims{d};
    enc_dims.insert(enc_dims.end(), config.hidden.begin(), config.hidden.end());
    enc_dims.push_back(config.latent_dim);
    std::vector<int> dec_dims(enc_dims.rbegin(), enc_dims.rend());
    RngStream enc_rng = rng.derive("init-encoder");
    RngStream dec_rng = rng.derive("init-decoder");
    map.encoder = Mlp::make(enc_dims, Activation::Identity, enc_rng);
    map.decoder = Mlp::make(dec_dims, Activation::Identity, dec_rng);

    AdamState enc_state = AdamState::init(map.encoder);
    AdamState dec_state = AdamState::init(map.decoder);
    AdamConfig adam;
    adam.lr = config.lr;

    const LossWeights& w = config.weights;
    const Eigen::Index n_test = test_data.size();
    std::vector<TraceRow> trace;
    trace.reserve(static_cast<size_t>(config.steps));

    for (int step = 0; step < config.steps; ++step) {
        RngStream step_rng = rng.derive("step", static_cast<std::uint64_t>(step));
        RngStream batch_rng = step_rng.derive("model-batch");
        ModelSampleBatch mb = ModelSampleBatch::draw(bundle, densities, config.samples_per_model, batch_rng);

        RngStream mini_rng = step_rng.derive("minibatch");
        const Eigen::Index b = std::min<Eigen::Index>(config.minibatch, n_test);
        Matrix mini(b, bundle.dim());
        for (Eigen::Index i = 0; i < b; ++i)
            mini.row(i) = test_data.features().row(mini_rng.uniform_int(static_cast<int>(n_test)));
        const Matrix rec_batch = vstack(mini, mb.points);

        MapGrads g_rec = MapGrads::zero(map);
        MapGrads g_con = MapGrads::zero(map);
        MapGrads g_sep = MapGrads::zero(map);
        double l_rec, l_con, l_sep;
        try {
            l_rec = loss_rec(map, rec_batch, w.beta, w.rec != 0.0 ? &g_rec : nullptr);
        } catch (const NumericalError&) {
            throw NumericalError("train_representation: reconstruction loss diverged at step " +
                                 std::to_string(step));
        }
        try {
            l_con = loss_con(map, mb, bundle.output_kind(), config.similarity, w.con != 0.0 ? &g_con : nullptr);
        } catch (const NumericalError&) {
            throw NumericalError("train_representation: connection loss diverged at step " +
                                 std::to_string(step));
        }
        try {
            l_sep = loss_sep(map, mb, w.sep != 0.0 ? &g_sep : nullptr);
        } catch (const NumericalError&) {
            throw NumericalError("train_representation: separation loss diverged at step " +
                                 std::to_string(step));
        }
        const double l_total = w.rec * l_rec + w.con * l_con + w.sep * l_sep;
        if (!std::isfinite(l_total))
            throw NumericalError("train_representation: total loss diverged at step " + std::to_string(step));

        g_rec.scale(w.rec);
        g_con.scale(w.con);
        g_sep.scale(w.sep);
        g_rec.add(g_con);
        g_rec.add(g_sep);
        adam_step(map.encoder, g_rec.enc, enc_state, adam);
        adam_step(map.decoder, g_rec.dec, dec_state, adam);

        trace.push_back(TraceRow{step, l_rec, l_con, l_sep, l_total});
    }

    return TrainResult{std::move(map), std::move(trace)};
}

// ---------------------------------------------------------------------------
// Loss balancing

namespace {

// Deterministic post-training reconstruction loss: full test features plus
// one fixed model-sample draw shared by every candidate run.
double final_rec_loss(const LatentMap& map, const ModelBundle& bundle,
                      const std::vector<DensityModel>& densities, const Dataset& test_data,
                      const TrainConfig& config, const RngStream& rng) {
    RngStream eval_rng = rng.derive("balance-eval");
    ModelSampleBatch eval = ModelSampleBatch::draw(bundle, densities, config.samples_per_model, eval_rng);
    return loss_rec(map, vstack(test_data.features(), eval.points), config.weights.beta, nullptr);
}

}  // namespace

BalanceResult balance_losses(const ModelBundle& bundle, const std::vector<DensityModel>& densities,
                             const Dataset& test_data, const TrainConfig& base_config, double threshold,
                             const RngStream& rng) {
    require(threshold > 0.0, "balance_losses: threshold must be > 0");

    BalanceResult result;

    TrainConfig ref_config = base_config;
    ref_config.weights.con = 0.0;
    ref_config.weights.sep = 0.0;
    TrainResult ref = train_representation(bundle, densities, test_data, ref_config, rng.derive("balance-train"));
    result.l_rec_reference = final_rec_loss(ref.map, bundle, densities, test_data, base_config, rng);

    const double ladder[] = {1.0, 2.0, 4.0, 8.0};
    double best = 0.0;
    for (double m : ladder) {
        TrainConfig cand = base_config;
        cand.weights.con = base_config.weights.con * m;
        cand.weights.sep = base_config.weights.sep * m;
        TrainResult run = train_representation(bundle, densities, test_data, cand, rng.derive("balance-train"));
        const double l = final_rec_loss(run.map, bundle, densities, test_data, base_config, rng);
        result.ladder.push_back(m);
        result.ladder_l_rec.push_back(l);
        const bool qualifies = std::isinf(threshold) || l <= (1.0 + threshold) * result.l_rec_reference;
        if (qualifies && m > best) best = m;
    }

    result.weights = base_config.weights;
    if (best > 0.0) {
        result.weights.con = base_config.weights.con * best;
        result.weights.sep = base_config.weights.sep * best;
    } else {
        result.fell_back = true;  // equal weighting
        result.weights.con = base_config.weights.con;
        result.weights.sep = base_config.weights.sep;
    }
    return result;
}

}  // namespace smc
