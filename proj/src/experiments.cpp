#include "smc/experiments.hpp"

#include "smc/metrics.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>

namespace smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Expert training

namespace {

// Fold "input = (x - mean) / std" into the first layer so the trained net
// consumes raw features.
void bake_input_affine(Mlp& net, const Vector& mean, const Vector& std) {
    Layer& first = net.layers().front();
    require(first.weights.cols() == mean.size() && mean.size() == std.size(),
            "bake_input_affine: dimension mismatch");
    first.bias -= first.weights * mean.cwiseQuotient(std);
    for (Eigen::Index k = 0; k < std.size(); ++k) first.weights.col(k) /= std(k);
}

Vector softmax_stable(const Vector& logits) {
    const Vector shifted = (logits.array() - logits.maxCoeff()).exp();
    return shifted / shifted.sum();
}

}  // namespace

Mlp train_regressor(const Matrix& x, const Vector& y, const std::vector<int>& hidden, int steps,
                    double lr, RngStream& rng) {
    require(x.rows() == y.size() && x.rows() >= 2, "train_regressor: bad training set");
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    Vector mean = x.colwise().mean();
    Vector std_dev(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const double var = (x.col(k).array() - mean(k)).square().sum() / static_cast<double>(n - 1);
        std_dev(k) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    const Matrix xs = (x.rowwise() - mean.transpose()).array().rowwise() / std_dev.transpose().array();

    std::vector<int> dims{static_cast<int>(d)};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    Mlp net = Mlp::make(dims, Activation::Identity, rng);
    AdamState state = AdamState::init(net);
    AdamConfig adam;
    adam.lr = lr;

    for (int step = 0; step < steps; ++step) {
        Mlp::Grads grads = net.zero_grads();
        for (Eigen::Index i = 0; i < n; ++i) {
            Mlp::Tape tape;
            const double pred = net.forward(xs.row(i).transpose(), tape)(0);
            const Vector upstream = Vector::Constant(1, 2.0 * (pred - y(i)) / static_cast<double>(n));
            net.backward(tape, upstream, grads);
        }
        adam_step(net, grads, state, adam);
    }

    bake_input_affine(net, mean, std_dev);
    return net;
}

Mlp train_classifier(const Matrix& x, const std::vector<int>& labels, int num_classes,
                     const std::vector<int>& hidden, int steps, double lr, double input_scale,
                     RngStream& rng) {
    require(x.rows() == static_cast<Eigen::Index>(labels.size()) && x.rows() >= 2,
            "train_classifier: bad training set");
    require(num_classes >= 2, "train_classifier: need >= 2 classes");
    require(input_scale > 0.0, "train_classifier: input_scale must be > 0");
    for (int l : labels) require(l >= 0 && l < num_classes, "train_classifier: label out of range");
    const Eigen::Index n = x.rows();
    const Matrix xs = x / input_scale;

    std::vector<int> dims{static_cast<int>(x.cols())};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(num_classes);
    // Trained on raw logits; cross-entropy gradients are applied manually and
    // softmax is attached only to the frozen net.
    Mlp net = Mlp::make(dims, Activation::Identity, rng);
    AdamState state = AdamState::init(net);
    AdamConfig adam;
    adam.lr = lr;

    for (int step = 0; step < steps; ++step) {
        Mlp::Grads grads = net.zero_grads();
        for (Eigen::Index i = 0; i < n; ++i) {
            Mlp::Tape tape;
            const Vector logits = net.forward(xs.row(i).transpose(), tape);
            Vector upstream = softmax_stable(logits) / static_cast<double>(n);
            upstream(labels[static_cast<size_t>(i)]) -= 1.0 / static_cast<double>(n);
            net.backward(tape, upstream, grads);
        }
        adam_step(net, grads, state, adam);
    }

    bake_input_affine(net, Vector::Zero(x.cols()), Vector::Constant(x.cols(), input_scale));
    net.layers().back().act = Activation::Softmax;
    return net;
}

// ---------------------------------------------------------------------------
// Regression scenarios

RegressionVariant regression_variant_from_name(const std::string& name) {
    if (name == "standard") return RegressionVariant::Standard;
    if (name == "gap") return RegressionVariant::Gap;
    if (name == "overlap") return RegressionVariant::Overlap;
    throw std::invalid_argument("unknown regression variant \"" + name + "\"");
}

std::string regression_variant_name(RegressionVariant variant) {
    switch (variant) {
        case RegressionVariant::Standard: return "standard";
        case RegressionVariant::Gap: return "gap";
        case RegressionVariant::Overlap: return "overlap";
    }
    throw std::invalid_argument("regression_variant_name: unknown variant");
}

RegressionScenario make_regression_scenario(RegressionVariant variant, std::uint64_t seed,
                                            const RegressionScenarioConfig& config) {
    require(config.train_per_model >= 2 && config.test_size >= 1, "make_regression_scenario: bad sizes");
    require(config.domain_std > 0.0 && config.noise_std >= 0.0, "make_regression_scenario: bad stds");

    std::vector<double> centers;
    switch (variant) {
        case RegressionVariant::Standard: centers = {5.0, 15.0}; break;
        case RegressionVariant::Gap: centers = {0.0, 20.0}; break;
        case RegressionVariant::Overlap: centers = {10.0, 10.0}; break;
    }

    RngStream root(seed);
    RngStream rng = root.derive("regression-" + regression_variant_name(variant));

    std::vector<ModelBundle::Entry> entries;
    std::vector<Dataset> train;
    std::vector<Mlp> nets;
    for (size_t j = 0; j < centers.size(); ++j) {
        RngStream xrng = rng.derive("train-x", j);
        RngStream yrng = rng.derive("train-y", j);
        Matrix x(config.train_per_model, 1);
        Vector y(config.train_per_model);
        for (int i = 0; i < config.train_per_model; ++i) {
            x(i, 0) = centers[j] + config.domain_std * xrng.normal();
            y(i) = std::sin(x(i, 0)) + config.noise_std * yrng.normal();
        }
        RngStream erng = rng.derive("expert", j);
        Mlp net = train_regressor(x, y, {16, 16}, config.expert_steps, config.expert_lr, erng);
        nets.push_back(net);
        entries.push_back(ModelBundle::Entry{
            ExpertModel::from_mlp_regressor("model-" + std::to_string(j), std::move(net)),
            ModelInfo::from_samples(x)});
        train.emplace_back(std::move(x), std::move(y));
    }

    const double lo = *std::min_element(centers.begin(), centers.end()) - 5.0;
    const double hi = *std::max_element(centers.begin(), centers.end()) + 5.0;
    RngStream txrng = rng.derive("test-x");
    RngStream tyrng = rng.derive("test-y");
    Matrix tx(config.test_size, 1);
    Vector ty(config.test_size);
    for (int i = 0; i < config.test_size; ++i) {
        tx(i, 0) = lo + (hi - lo) * txrng.uniform();
        ty(i) = std::sin(tx(i, 0)) + config.noise_std * tyrng.normal();
    }
    return RegressionScenario{ModelBundle(std::move(entries)), std::move(train),
                              Dataset(std::move(tx), std::move(ty)), std::move(centers),
                              config.domain_std, std::move(nets)};
}

// ---------------------------------------------------------------------------
// Digits scenario

DigitsScenario make_digits_scenario(const std::string& corpus_csv, std::uint64_t seed,
                                    const DigitsScenarioConfig& config) {
    require(config.test_fraction > 0.0 && config.test_fraction < 1.0, "make_digits_scenario: bad test fraction");
    require(config.specialty_fraction > 0.0 && config.specialty_fraction < 1.0,
            "make_digits_scenario: bad specialty fraction");

    const Dataset corpus = read_dataset_csv(corpus_csv);
    require(corpus.has_targets(), "make_digits_scenario: corpus needs a __target__ column");
    const int num_classes = 10;

    std::vector<std::vector<int>> by_class(num_classes);
    for (Eigen::Index i = 0; i < corpus.size(); ++i) {
        const double t = corpus.targets()(i);
        require(t == std::floor(t) && t >= 0 && t < num_classes, "make_digits_scenario: bad label");
        by_class[static_cast<size_t>(t)].push_back(static_cast<int>(i));
    }
    for (int c = 0; c < num_classes; ++c)
        require(!by_class[static_cast<size_t>(c)].empty(),
                "make_digits_scenario: digit " + std::to_string(c) + " absent from corpus");

    RngStream root(seed);
    RngStream rng = root.derive("digits");

    // Stratified holdout: per class, shuffle and reserve the leading fraction.
    std::vector<int> test_idx;
    std::vector<std::vector<int>> pool(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        auto& idx = by_class[static_cast<size_t>(c)];
        RngStream srng = rng.derive("holdout", static_cast<std::uint64_t>(c));
        for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<size_t>(srng.uniform_int(static_cast<int>(i)))]);
        const size_t n_test = static_cast<size_t>(config.test_fraction * static_cast<double>(idx.size()));
        require(n_test >= 1 && n_test < idx.size(), "make_digits_scenario: degenerate holdout");
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        pool[static_cast<size_t>(c)].assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(test_idx.begin(), test_idx.end());

    Eigen::Index pool_total = 0;
    for (const auto& p : pool) pool_total += static_cast<Eigen::Index>(p.size());
    const int split_size = static_cast<int>(pool_total / num_classes);

    Matrix tf(static_cast<Eigen::Index>(test_idx.size()), corpus.dim());
    Vector tl(static_cast<Eigen::Index>(test_idx.size()));
    for (size_t i = 0; i < test_idx.size(); ++i) {
        tf.row(static_cast<Eigen::Index>(i)) = corpus.features().row(test_idx[i]);
        tl(static_cast<Eigen::Index>(i)) = corpus.targets()(test_idx[i]);
    }
    Dataset test(std::move(tf), std::move(tl));

    std::vector<ExpertModel> experts;
    std::vector<Matrix> train_features;
    std::vector<std::vector<int>> train_labels;
    std::vector<Mlp> nets;

    for (int j = 0; j < num_classes; ++j) {
        const auto& own = pool[static_cast<size_t>(j)];
        int n_specialty = static_cast<int>(std::lround(config.specialty_fraction * split_size));
        n_specialty = std::min<int>(n_specialty, static_cast<int>(own.size()));
        const int n_random = split_size - n_specialty;

        std::vector<int> chosen(own.begin(), own.begin() + n_specialty);
        std::vector<int> others;
        for (int c = 0; c < num_classes; ++c)
            if (c != j) others.insert(others.end(), pool[static_cast<size_t>(c)].begin(), pool[static_cast<size_t>(c)].end());
        RngStream orng = rng.derive("random-part", static_cast<std::uint64_t>(j));
        for (size_t i = others.size(); i > 1; --i) std::swap(others[i - 1], others[static_cast<size_t>(orng.uniform_int(static_cast<int>(i)))]);
        chosen.insert(chosen.end(), others.begin(), others.begin() + n_random);

        RngStream shrng = rng.derive("shuffle-split", static_cast<std::uint64_t>(j));
        for (size_t i = chosen.size(); i > 1; --i) std::swap(chosen[i - 1], chosen[static_cast<size_t>(shrng.uniform_int(static_cast<int>(i)))]);

        Matrix feats(static_cast<Eigen::Index>(chosen.size()), corpus.dim());
        std::vector<int> labels(chosen.size());
        for (size_t i = 0; i < chosen.size(); ++i) {
            feats.row(static_cast<Eigen::Index>(i)) = corpus.features().row(chosen[i]);
            labels[i] = static_cast<int>(corpus.targets()(chosen[i]));
        }

        RngStream erng = rng.derive("expert", static_cast<std::uint64_t>(j));
        Mlp net = train_classifier(feats, labels, num_classes, config.hidden, config.expert_steps,
                                   config.expert_lr, 16.0, erng);
        nets.push_back(net);
        experts.push_back(ExpertModel::from_mlp_classifier("digit-" + std::to_string(j), std::move(net)));
        train_features.push_back(std::move(feats));
        train_labels.push_back(std::move(labels));
    }
    return DigitsScenario{std::move(experts), std::move(train_features), std::move(train_labels),
                          std::move(test), num_classes, std::move(nets)};
}

ModelBundle digits_bundle(const DigitsScenario& scenario, int info_count) {
    require(info_count != 0, "digits_bundle: info_count 0 leaves no sample to fit a density from");
    require(info_count == kFullInfo || info_count >= 1, "digits_bundle: bad info_count");
    std::vector<ModelBundle::Entry> entries;
    for (size_t j = 0; j < scenario.experts.size(); ++j) {
        const Matrix& feats = scenario.train_features[j];
        const Eigen::Index rows = info_count == kFullInfo
                                      ? feats.rows()
                                      : std::min<Eigen::Index>(info_count, feats.rows());
        entries.push_back(ModelBundle::Entry{scenario.experts[j],
                                             ModelInfo::from_samples(feats.topRows(rows))});
    }
    return ModelBundle(std::move(entries));
}

double specialist_binary_accuracy(const DigitsScenario& scenario, int model_index, RngStream& rng) {
    require(model_index >= 0 && model_index < static_cast<int>(scenario.experts.size()),
            "specialist_binary_accuracy: bad model index");
    const Dataset& test = scenario.test;
    std::vector<int> own, other;
    for (Eigen::Index i = 0; i < test.size(); ++i)
        (static_cast<int>(test.targets()(i)) == model_index ? own : other).push_back(static_cast<int>(i));
    require(!own.empty(), "specialist_binary_accuracy: specialty digit absent from test set");

    // Domain-composition draw: every specialty instance plus a proportional
    // random selection of other digits.
    std::vector<int> probe = own;
    const int n_other = std::max<int>(1, static_cast<int>(own.size()) / 9);
    for (int k = 0; k < n_other; ++k) probe.push_back(other[static_cast<size_t>(rng.uniform_int(static_cast<int>(other.size())))]);

    const ExpertModel& expert = scenario.experts[static_cast<size_t>(model_index)];
    int correct = 0;
    for (int idx : probe) {
        const Vector p = expert.predict(test.row(idx)).probs();
        int arg = 0;
        for (Eigen::Index k = 1; k < p.size(); ++k)
            if (p(k) > p(arg)) arg = static_cast<int>(k);
        const bool said_own = arg == model_index;
        const bool is_own = static_cast<int>(test.targets()(idx)) == model_index;
        if (said_own == is_own) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probe.size());
}

// ---------------------------------------------------------------------------
// Report plumbing

void ExperimentReport::append(const ExperimentReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    plot.insert(plot.end(), other.plot.begin(), other.plot.end());
    timings.insert(timings.end(), other.timings.begin(), other.timings.end());
}

std::vector<double> ExperimentReport::values(const std::string& strategy, const std::string& metric) const {
    std::vector<double> out;
    for (const ReportRow& r : rows)
        if (r.strategy == strategy && r.metric == metric) out.push_back(r.value);
    return out;
}

double ExperimentReport::seed_mean(const std::string& strategy, const std::string& metric) const {
    const std::vector<double> v = values(strategy, metric);
    require(!v.empty(), "seed_mean: no rows for " + strategy + "/" + metric);
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void ExperimentReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "ExperimentReport: cannot write " + path);
    out << "scenario,seed,strategy,metric,value\n";
    for (const ReportRow& r : rows)
        out << r.scenario << ',' << r.seed << ',' << r.strategy << ',' << r.metric << ','
            << format_double(r.value) << '\n';
}

void ExperimentReport::write_json(const std::string& path) const {
    json rows_json = json::array();
    for (const ReportRow& r : rows)
        rows_json.push_back({{"scenario", r.scenario},
                             {"seed", r.seed},
                             {"strategy", r.strategy},
                             {"metric", r.metric},
                             {"value", r.value}});
    json j;
    j["rows"] = std::move(rows_json);
    std::ofstream out(path);
    require(out.good(), "ExperimentReport: cannot write " + path);
    out << j.dump(2) << "\n";
}

void ExperimentReport::write_plot_csv(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "ExperimentReport: cannot write " + path);
    out << "scenario,seed,x,series,value\n";
    for (const PlotRow& r : plot)
        out << r.scenario << ',' << r.seed << ',' << format_double(r.x) << ',' << r.series << ','
            << format_double(r.value) << '\n';
}

void ExperimentReport::write_timings_csv(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "ExperimentReport: cannot write " + path);
    out << "scenario,seed,phase,seconds\n";
    for (const TimingRow& r : timings)
        out << r.scenario << ',' << r.seed << ',' << r.phase << ',' << format_double(r.seconds) << '\n';
}

// ---------------------------------------------------------------------------
// Benchmark runner

double latent_separation(const LatentDensitySet& latents) {
    double sum = 0.0;
    long count = 0;
    for (int a = 0; a < latents.size(); ++a)
        for (int b = a + 1; b < latents.size(); ++b) {
            const Matrix& za = latents.densities[static_cast<size_t>(a)].support();
            const Matrix& zb = latents.densities[static_cast<size_t>(b)].support();
            for (Eigen::Index i = 0; i < za.rows(); ++i)
                for (Eigen::Index k = 0; k < zb.rows(); ++k) {
                    sum += (za.row(i) - zb.row(k)).norm();
                    ++count;
                }
        }
    require(count > 0, "latent_separation: need at least two models");
    return sum / static_cast<double>(count);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool wants(const std::vector<std::string>& strategies, const std::string& name) {
    return strategies.empty() || std::find(strategies.begin(), strategies.end(), name) != strategies.end();
}

std::vector<int> int_labels(const Dataset& data) {
    std::vector<int> labels(static_cast<size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) labels[static_cast<size_t>(i)] = static_cast<int>(data.targets()(i));
    return labels;
}

ExperimentReport run_regression(const BenchConfig& config, RegressionVariant variant) {
    ExperimentReport report;
    const std::string scenario_name = "regression-" + regression_variant_name(variant);

    for (int s = 0; s < config.seeds; ++s) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
        auto t0 = Clock::now();
        RegressionScenario scenario = make_regression_scenario(variant, seed, config.regression);
        report.timings.push_back({scenario_name, seed, "experts", seconds_since(t0)});

        SmcFitConfig fit_config = config.fit;
        fit_config.seed = seed;
        fit_config.train.weights = config.regression_weights;
        t0 = Clock::now();
        SmcFitResult fit = fit_smc(scenario.bundle, scenario.test, fit_config);
        report.timings.push_back({scenario_name, seed, "fit-smc", seconds_since(t0)});

        t0 = Clock::now();
        const Matrix& tx = scenario.test.features();
        const Vector& ty = scenario.test.targets();
        const Eigen::Index n = tx.rows();

        Matrix smc_w;
        Vector smc_conf;
        compute_weights_batch(fit.engine.latents, fit.engine.map, tx, fit.engine.gamma, smc_w, smc_conf);

        auto add_plot = [&](double x, const std::string& series, double value) {
            report.plot.push_back({scenario_name, seed, x, series, value});
        };

        auto evaluate = [&](const std::string& name, const Vector& preds) {
            report.rows.push_back({scenario_name, seed, name, "rmse", rmse(preds, ty)});
            for (Eigen::Index i = 0; i < n; ++i) add_plot(tx(i, 0), name, preds(i));
        };

        if (wants(config.strategies, "smc")) {
            const Matrix preds = predict_batch(scenario.bundle, EnsembleStrategy::smc(), &fit.engine, tx);
            evaluate("smc", preds.col(0));
            for (Eigen::Index i = 0; i < n; ++i) {
                add_plot(tx(i, 0), "confidence", smc_conf(i));
                for (int j = 0; j < scenario.bundle.size(); ++j)
                    add_plot(tx(i, 0), "weight-" + std::to_string(j), smc_w(i, j));
            }
        }
        if (wants(config.strategies, "global-average")) {
            const Matrix preds =
                predict_batch(scenario.bundle, EnsembleStrategy::global_average(), nullptr, tx);
            evaluate("global-average", preds.col(0));
        }
        if (wants(config.strategies, "oracle")) {
            // True-domain switching: the model whose center is nearest.
            Vector preds(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                int best = 0;
                for (size_t j = 1; j < scenario.centers.size(); ++j)
                    if (std::abs(tx(i, 0) - scenario.centers[j]) <
                        std::abs(tx(i, 0) - scenario.centers[static_cast<size_t>(best)]))
                        best = static_cast<int>(j);
                preds(i) = scenario.bundle.model(best).predict(tx.row(i).transpose()).scalar();
            }
            evaluate("oracle", preds);
        }
        for (Eigen::Index i = 0; i < n; ++i) add_plot(tx(i, 0), "truth", ty(i));

        if (variant == RegressionVariant::Gap && wants(config.strategies, "smc")) {
            double gap_sum = 0.0, core_sum = 0.0;
            int gap_n = 0, core_n = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (tx(i, 0) >= 8.0 && tx(i, 0) <= 12.0) {
                    gap_sum += smc_conf(i);
                    ++gap_n;
                }
                if (tx(i, 0) >= -2.0 && tx(i, 0) <= 2.0) {
                    core_sum += smc_conf(i);
                    ++core_n;
                }
            }
            require(gap_n > 0 && core_n > 0, "run_benchmark: gap/core probe regions empty");
            report.rows.push_back(
                {scenario_name, seed, "smc", "mean_confidence_x_8_12", gap_sum / gap_n});
            report.rows.push_back(
                {scenario_name, seed, "smc", "mean_confidence_x_m2_2", core_sum / core_n});
        }
        report.timings.push_back({scenario_name, seed, "evaluate", seconds_since(t0)});
    }
    return report;
}

ExperimentReport run_digits(const BenchConfig& config) {
    ExperimentReport report;
    const std::string scenario_name = "digits";

    for (int s = 0; s < config.seeds; ++s) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
        auto t0 = Clock::now();
        DigitsScenario scenario = make_digits_scenario(config.digits_corpus, seed, config.digits);
        report.timings.push_back({scenario_name, seed, "experts", seconds_since(t0)});

        const std::vector<int> labels = int_labels(scenario.test);
        const Matrix& tx = scenario.test.features();
        const ModelBundle full_bundle = digits_bundle(scenario, kFullInfo);

        t0 = Clock::now();
        if (wants(config.strategies, "majority-vote")) {
            const Matrix scores =
                predict_batch(full_bundle, EnsembleStrategy::majority_vote(), nullptr, tx);
            report.rows.push_back({scenario_name, seed, "majority-vote", "auroc", auroc_ovr(scores, labels)});
        }
        if (wants(config.strategies, "entropy-weighted")) {
            const Matrix scores =
                predict_batch(full_bundle, EnsembleStrategy::entropy_weighted(), nullptr, tx);
            report.rows.push_back(
                {scenario_name, seed, "entropy-weighted", "auroc", auroc_ovr(scores, labels)});
        }
        {
            RngStream root(seed);
            RngStream arng = root.derive("binary-accuracy");
            for (int j = 0; j < static_cast<int>(scenario.experts.size()); ++j) {
                RngStream jrng = arng.derive("model", static_cast<std::uint64_t>(j));
                report.rows.push_back({scenario_name, seed, "expert-" + std::to_string(j),
                                       "binary_accuracy", specialist_binary_accuracy(scenario, j, jrng)});
            }
        }
        report.timings.push_back({scenario_name, seed, "baselines", seconds_since(t0)});

        for (int c : config.info_counts) {
            const std::string ctag = c == kFullInfo ? "full" : std::to_string(c);
            const double plot_x =
                c == kFullInfo ? static_cast<double>(scenario.train_features[0].rows()) : c;
            if (c == 0) {
                // No density can be fitted from an empty sample: the pipeline
                // refuses, and the run is scored at the chance baseline.
                for (const char* name : {"smc", "smc-rec"})
                    if (wants(config.strategies, name)) {
                        report.rows.push_back({scenario_name, seed, name, "auroc_c0", 0.5});
                        report.plot.push_back({scenario_name, seed, 0.0, name, 0.5});
                    }
                continue;
            }
            const ModelBundle bundle = digits_bundle(scenario, c);
            struct VariantSpec {
                const char* name;
                bool rec_only;
            };
            for (const VariantSpec v : {VariantSpec{"smc", false}, VariantSpec{"smc-rec", true}}) {
                if (!wants(config.strategies, v.name)) continue;
                SmcFitConfig fit_config = config.fit;
                fit_config.seed = seed;
                if (v.rec_only) {
                    fit_config.train.weights.con = 0.0;
                    fit_config.train.weights.sep = 0.0;
                }
                t0 = Clock::now();
                SmcFitResult fit = fit_smc(bundle, scenario.test, fit_config);
                report.timings.push_back(
                    {scenario_name, seed, std::string(v.name) + "-fit-c" + ctag, seconds_since(t0)});

                t0 = Clock::now();
                const Matrix scores = predict_batch(bundle, EnsembleStrategy::smc(), &fit.engine, tx);
                const double auroc = auroc_ovr(scores, labels);
                report.rows.push_back({scenario_name, seed, v.name, "auroc_c" + ctag, auroc});
                report.rows.push_back({scenario_name, seed, v.name, "latent_separation_c" + ctag,
                                       latent_separation(fit.engine.latents)});
                report.plot.push_back({scenario_name, seed, plot_x, v.name, auroc});
                report.timings.push_back(
                    {scenario_name, seed, std::string(v.name) + "-eval-c" + ctag, seconds_since(t0)});
            }
        }
    }
    return report;
}

}  // namespace

ExperimentReport run_benchmark(const BenchConfig& config) {
    require(config.seeds >= 1, "run_benchmark: seeds must be >= 1");
    if (config.scenario == "digits") return run_digits(config);
    const std::string prefix = "regression-";
    require(config.scenario.rfind(prefix, 0) == 0, "unknown scenario \"" + config.scenario + "\"");
    return run_regression(config, regression_variant_from_name(config.scenario.substr(prefix.size())));
}

}  // namespace smc
