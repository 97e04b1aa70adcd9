// Command-line front door: fit / predict / bench / subsample / balance.
// JSON pipeline configs with full flag overrides; every command is seeded
// explicitly and bit-reproducible.

#include "smc/cohort.hpp"
#include "smc/experiments.hpp"
#include "smc/kernels.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Pipeline config

struct ModelSpec {
    std::string id;
    std::string kind;  // "regression" | "classification"
    std::string net;   // serialized Mlp
    std::string info;  // serialized ModelInfo
};

struct PipelineConfig {
    std::optional<std::uint64_t> seed;  // must be set somewhere; never wall-clock
    std::string output_dir;
    std::vector<ModelSpec> models;
    std::string test_csv;
    std::vector<std::string> strategies{"smc"};
    smc::TrainConfig train;
    smc::WeightConfig weight;
    fs::path base_dir;  // config file location; relative paths resolve against it
};

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) throw std::invalid_argument(ctx + ": unknown key \"" + item.key() + "\"");
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return json::parse(in);
}

smc::TrainConfig parse_train_config(const json& j) {
    check_keys(j,
               {"steps", "latent_dim", "hidden", "minibatch", "lr", "samples_per_model",
                "standardisation_samples", "weights", "similarity"},
               "train");
    smc::TrainConfig t;
    if (j.contains("steps")) t.steps = j.at("steps").get<int>();
    if (j.contains("latent_dim")) t.latent_dim = j.at("latent_dim").get<int>();
    if (j.contains("hidden")) t.hidden = j.at("hidden").get<std::vector<int>>();
    if (j.contains("minibatch")) t.minibatch = j.at("minibatch").get<int>();
    if (j.contains("lr")) t.lr = j.at("lr").get<double>();
    if (j.contains("samples_per_model")) t.samples_per_model = j.at("samples_per_model").get<int>();
    if (j.contains("standardisation_samples"))
        t.standardisation_samples = j.at("standardisation_samples").get<int>();
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        check_keys(w, {"rec", "con", "sep", "beta"}, "train.weights");
        if (w.contains("rec")) t.weights.rec = w.at("rec").get<double>();
        if (w.contains("con")) t.weights.con = w.at("con").get<double>();
        if (w.contains("sep")) t.weights.sep = w.at("sep").get<double>();
        if (w.contains("beta")) t.weights.beta = w.at("beta").get<double>();
    }
    if (j.contains("similarity")) {
        const json& s = j.at("similarity");
        check_keys(s, {"regression_scale", "regression_scale_floor"}, "train.similarity");
        if (s.contains("regression_scale"))
            t.similarity.regression_scale = s.at("regression_scale").get<double>();
        if (s.contains("regression_scale_floor"))
            t.similarity.regression_scale_floor = s.at("regression_scale_floor").get<double>();
    }
    return t;
}

json train_to_json(const smc::TrainConfig& t) {
    return json{{"steps", t.steps},
                {"latent_dim", t.latent_dim},
                {"hidden", t.hidden},
                {"minibatch", t.minibatch},
                {"lr", t.lr},
                {"samples_per_model", t.samples_per_model},
                {"standardisation_samples", t.standardisation_samples},
                {"weights",
                 {{"rec", t.weights.rec},
                  {"con", t.weights.con},
                  {"sep", t.weights.sep},
                  {"beta", t.weights.beta}}},
                {"similarity",
                 {{"regression_scale", t.similarity.regression_scale},
                  {"regression_scale_floor", t.similarity.regression_scale_floor}}}};
}

smc::WeightConfig parse_weight_config(const json& j) {
    check_keys(j, {"gamma", "latent_refit_samples", "tau_percentile"}, "weight");
    smc::WeightConfig w;
    if (j.contains("gamma")) w.gamma = j.at("gamma").get<double>();
    if (j.contains("latent_refit_samples"))
        w.latent_refit_samples = j.at("latent_refit_samples").get<Eigen::Index>();
    if (j.contains("tau_percentile")) w.tau_percentile = j.at("tau_percentile").get<double>();
    return w;
}

json weight_to_json(const smc::WeightConfig& w) {
    return json{{"gamma", w.gamma},
                {"latent_refit_samples", static_cast<long long>(w.latent_refit_samples)},
                {"tau_percentile", w.tau_percentile}};
}

PipelineConfig load_pipeline_config(const std::string& path) {
    const json j = load_json_file(path);
    check_keys(j, {"seed", "output_dir", "models", "test_csv", "strategies", "train", "weight"},
               "config");
    PipelineConfig c;
    c.base_dir = fs::path(path).parent_path();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("test_csv")) c.test_csv = j.at("test_csv").get<std::string>();
    if (j.contains("strategies")) c.strategies = j.at("strategies").get<std::vector<std::string>>();
    if (j.contains("train")) c.train = parse_train_config(j.at("train"));
    if (j.contains("weight")) c.weight = parse_weight_config(j.at("weight"));
    if (j.contains("models")) {
        size_t idx = 0;
        for (const json& m : j.at("models")) {
            check_keys(m, {"id", "kind", "net", "info"}, "models[" + std::to_string(idx) + "]");
            ModelSpec spec;
            spec.id = m.contains("id") ? m.at("id").get<std::string>()
                                       : "model-" + std::to_string(idx);
            spec.kind = m.at("kind").get<std::string>();
            spec.net = m.at("net").get<std::string>();
            spec.info = m.at("info").get<std::string>();
            c.models.push_back(std::move(spec));
            ++idx;
        }
    }
    return c;
}

std::string resolve_path(const PipelineConfig& c, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (c.base_dir / path).string();
}

smc::ModelBundle load_bundle(const PipelineConfig& c) {
    if (c.models.empty()) throw std::invalid_argument("config: no models listed");
    std::vector<smc::ModelBundle::Entry> entries;
    for (const ModelSpec& m : c.models) {
        smc::Mlp net = smc::Mlp::load(resolve_path(c, m.net));
        smc::ExpertModel model =
            m.kind == "regression"
                ? smc::ExpertModel::from_mlp_regressor(m.id, std::move(net))
                : m.kind == "classification"
                      ? smc::ExpertModel::from_mlp_classifier(m.id, std::move(net))
                      : throw std::invalid_argument("model \"" + m.id +
                                                    "\": kind must be regression or classification");
        entries.push_back(
            smc::ModelBundle::Entry{std::move(model), smc::ModelInfo::load(resolve_path(c, m.info))});
    }
    return smc::ModelBundle(std::move(entries));
}

smc::Dataset load_test_data(const PipelineConfig& c) {
    if (c.test_csv.empty()) throw std::invalid_argument("config: test_csv is required");
    return smc::read_dataset_csv(resolve_path(c, c.test_csv));
}

// Flag > config > SMC_OUTPUT_DIR > current directory.
fs::path resolve_output_dir(const std::string& flag_value, const std::string& config_value) {
    std::string dir = flag_value;
    if (dir.empty()) dir = config_value;
    if (dir.empty()) {
        const char* env = std::getenv("SMC_OUTPUT_DIR");
        if (env != nullptr && *env != '\0') dir = env;
    }
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return fs::path(dir);
}

// ---------------------------------------------------------------------------
// Shared flag overrides

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    std::optional<int> steps, latent_dim, minibatch, samples_per_model, standardisation_samples;
    std::optional<double> lr, rec, con, sep, beta, regression_scale;
    std::vector<int> hidden;
    std::optional<double> gamma, tau_percentile;
    std::optional<long long> refit_samples;
    std::vector<std::string> strategies;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "root seed (overrides config)");
    cmd->add_option("--output-dir", o.output_dir, "output directory (overrides config and SMC_OUTPUT_DIR)");
    cmd->add_option("--steps", o.steps, "representation training steps");
    cmd->add_option("--latent-dim", o.latent_dim, "latent dimensionality");
    cmd->add_option("--minibatch", o.minibatch, "training minibatch size");
    cmd->add_option("--samples-per-model", o.samples_per_model, "model-dataset draws per step");
    cmd->add_option("--standardisation-samples", o.standardisation_samples,
                    "density draws per model for input standardisation");
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--rec", o.rec, "reconstruction loss weight");
    cmd->add_option("--con", o.con, "connection loss weight");
    cmd->add_option("--sep", o.sep, "separation loss weight");
    cmd->add_option("--beta", o.beta, "latent L2 coefficient");
    cmd->add_option("--regression-scale", o.regression_scale,
                    "prediction-similarity scale (<= 0: per-batch empirical range)");
    cmd->add_option("--hidden", o.hidden, "encoder hidden layer sizes")->delimiter(',');
    cmd->add_option("--gamma", o.gamma, "weight regulariser");
    cmd->add_option("--refit-samples", o.refit_samples, "latent refit draws per moments-variant model");
    cmd->add_option("--tau-percentile", o.tau_percentile, "confidence percentile for the low-confidence threshold");
    cmd->add_option("--strategies", o.strategies, "strategy names")->delimiter(',');
}

void apply_overrides(PipelineConfig& c, const Overrides& o) {
    if (o.seed) c.seed = *o.seed;
    if (o.steps) c.train.steps = *o.steps;
    if (o.latent_dim) c.train.latent_dim = *o.latent_dim;
    if (o.minibatch) c.train.minibatch = *o.minibatch;
    if (o.samples_per_model) c.train.samples_per_model = *o.samples_per_model;
    if (o.standardisation_samples) c.train.standardisation_samples = *o.standardisation_samples;
    if (o.lr) c.train.lr = *o.lr;
    if (o.rec) c.train.weights.rec = *o.rec;
    if (o.con) c.train.weights.con = *o.con;
    if (o.sep) c.train.weights.sep = *o.sep;
    if (o.beta) c.train.weights.beta = *o.beta;
    if (o.regression_scale) c.train.similarity.regression_scale = *o.regression_scale;
    if (!o.hidden.empty()) c.train.hidden = o.hidden;
    if (o.gamma) c.weight.gamma = *o.gamma;
    if (o.refit_samples) c.weight.latent_refit_samples = static_cast<Eigen::Index>(*o.refit_samples);
    if (o.tau_percentile) c.weight.tau_percentile = *o.tau_percentile;
    if (!o.strategies.empty()) c.strategies = o.strategies;
}

std::uint64_t require_seed(const PipelineConfig& c) {
    if (!c.seed) throw std::invalid_argument("no seed: set \"seed\" in the config or pass --seed");
    return *c.seed;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string config_path;
    Overrides overrides;
};

int cmd_fit(const FitArgs& a) {
    PipelineConfig cfg = load_pipeline_config(a.config_path);
    apply_overrides(cfg, a.overrides);
    const std::uint64_t seed = require_seed(cfg);

    const smc::ModelBundle bundle = load_bundle(cfg);
    const smc::Dataset test = load_test_data(cfg);

    smc::SmcFitConfig fit_config;
    fit_config.train = cfg.train;
    fit_config.weight = cfg.weight;
    fit_config.seed = seed;
    const smc::SmcFitResult result = smc::fit_smc(bundle, test, fit_config);

    const fs::path out = resolve_output_dir(a.overrides.output_dir, cfg.output_dir);
    const fs::path engine_path = out / "engine.json";
    const fs::path trace_path = out / "trace.csv";
    result.engine.save(engine_path.string());
    smc::write_trace_csv(trace_path.string(), result.trace);
    std::cout << "checkpoint: " << engine_path.string() << "\n";
    std::cout << "trace: " << trace_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string config_path;
    std::string checkpoint;
    std::string input_csv;
    std::string output_csv;
    Overrides overrides;
};

smc::EnsembleStrategy make_strategy(const std::string& name, const smc::ModelBundle& bundle,
                                    const PipelineConfig& cfg) {
    if (name == "smc") return smc::EnsembleStrategy::smc();
    if (name == "global-average") return smc::EnsembleStrategy::global_average();
    if (name == "majority-vote") return smc::EnsembleStrategy::majority_vote();
    if (name == "entropy-weighted") return smc::EnsembleStrategy::entropy_weighted();
    if (name == "bma" || name == "smc-bma") {
        const smc::Dataset validation = load_test_data(cfg);
        if (!validation.has_targets())
            throw std::invalid_argument(name + " needs a labelled test_csv for the information criterion");
        const smc::Vector w = smc::bma_weights(bundle, validation);
        return name == "bma" ? smc::EnsembleStrategy::fixed(w) : smc::EnsembleStrategy::smc_bma(w);
    }
    throw std::invalid_argument("unknown strategy \"" + name + "\"");
}

int cmd_predict(const PredictArgs& a) {
    PipelineConfig cfg = load_pipeline_config(a.config_path);
    apply_overrides(cfg, a.overrides);

    const smc::ModelBundle bundle = load_bundle(cfg);
    const fs::path out = resolve_output_dir(a.overrides.output_dir, cfg.output_dir);
    const std::string checkpoint = a.checkpoint.empty() ? (out / "engine.json").string() : a.checkpoint;
    const smc::SmcEngine engine = smc::SmcEngine::load(checkpoint);
    if (engine.map.input_dim() != bundle.dim())
        throw std::invalid_argument("checkpoint dimension mismatch: engine expects " +
                                    std::to_string(engine.map.input_dim()) + ", models take " +
                                    std::to_string(bundle.dim()));

    const smc::Dataset input = smc::read_dataset_csv(a.input_csv);
    if (input.dim() != bundle.dim())
        throw std::invalid_argument("input dimension mismatch: got " + std::to_string(input.dim()) +
                                    ", models take " + std::to_string(bundle.dim()));

    smc::Matrix weights;
    smc::Vector confidence;
    smc::compute_weights_batch(engine.latents, engine.map, input.features(), engine.gamma, weights,
                               confidence);

    std::vector<std::string> names;
    std::vector<smc::Matrix> preds;
    for (const std::string& name : cfg.strategies) {
        const smc::EnsembleStrategy strategy = make_strategy(name, bundle, cfg);
        preds.push_back(smc::predict_batch(bundle, strategy, &engine, input.features()));
        names.push_back(name);
    }

    const std::string out_path = a.output_csv.empty() ? (out / "predictions.csv").string() : a.output_csv;
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot write CSV file: " + out_path);
    for (size_t s = 0; s < names.size(); ++s) {
        if (preds[s].cols() == 1) {
            os << "pred_" << names[s] << ',';
        } else {
            for (Eigen::Index k = 0; k < preds[s].cols(); ++k) os << names[s] << "_p" << k << ',';
        }
    }
    for (int j = 0; j < bundle.size(); ++j) os << "w_" << j << ',';
    os << "confidence,low_confidence\n";
    for (Eigen::Index i = 0; i < input.size(); ++i) {
        for (const smc::Matrix& p : preds)
            for (Eigen::Index k = 0; k < p.cols(); ++k) os << smc::format_double(p(i, k)) << ',';
        for (Eigen::Index j = 0; j < weights.cols(); ++j) os << smc::format_double(weights(i, j)) << ',';
        os << smc::format_double(confidence(i)) << ',' << (confidence(i) < engine.tau ? 1 : 0) << '\n';
    }
    os.close();
    std::cout << "predictions: " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    smc::BenchConfig config;
    std::string config_path;  // optional pipeline config for train/weight sections
    bool emit_assets = false;
    Overrides overrides;
};

void emit_scenario_assets(const smc::BenchConfig& bc, const fs::path& dir) {
    fs::create_directories(dir);
    json models = json::array();
    std::uint64_t seed = bc.seed;

    if (bc.scenario == "digits") {
        const smc::DigitsScenario s = smc::make_digits_scenario(bc.digits_corpus, seed, bc.digits);
        for (size_t j = 0; j < s.nets.size(); ++j) {
            const std::string net = "digit-" + std::to_string(j) + ".json";
            const std::string info = "info-" + std::to_string(j) + ".json";
            s.nets[j].save((dir / net).string());
            smc::ModelInfo::from_samples(s.train_features[j]).save((dir / info).string());
            models.push_back({{"id", "digit-" + std::to_string(j)},
                              {"kind", "classification"},
                              {"net", net},
                              {"info", info}});
        }
        smc::write_dataset_csv((dir / "test.csv").string(), s.test);
    } else {
        const smc::RegressionScenario s = smc::make_regression_scenario(
            smc::regression_variant_from_name(bc.scenario.substr(std::string("regression-").size())),
            seed, bc.regression);
        for (size_t j = 0; j < s.nets.size(); ++j) {
            const std::string net = "model-" + std::to_string(j) + ".json";
            const std::string info = "info-" + std::to_string(j) + ".json";
            s.nets[j].save((dir / net).string());
            s.bundle.info(static_cast<int>(j)).save((dir / info).string());
            models.push_back({{"id", "model-" + std::to_string(j)},
                              {"kind", "regression"},
                              {"net", net},
                              {"info", info}});
        }
        smc::write_dataset_csv((dir / "test.csv").string(), s.test);
    }

    json cfg;
    cfg["seed"] = seed;
    cfg["models"] = std::move(models);
    cfg["test_csv"] = "test.csv";
    cfg["strategies"] = json::array({"smc"});
    smc::TrainConfig train = bc.fit.train;
    if (bc.scenario != "digits") train.weights = bc.regression_weights;
    cfg["train"] = train_to_json(train);
    cfg["weight"] = weight_to_json(bc.fit.weight);
    std::ofstream os((dir / "config.json").string());
    if (!os) throw std::invalid_argument("cannot write " + (dir / "config.json").string());
    os << cfg.dump(2) << "\n";
    std::cout << "assets: " << dir.string() << "\n";
}

int cmd_bench(BenchArgs& a) {
    if (!a.config_path.empty()) {
        PipelineConfig cfg = load_pipeline_config(a.config_path);
        a.config.fit.train = cfg.train;
        a.config.fit.weight = cfg.weight;
    }
    PipelineConfig shim;  // reuse the flag plumbing for train/weight overrides
    shim.train = a.config.fit.train;
    shim.weight = a.config.fit.weight;
    apply_overrides(shim, a.overrides);
    a.config.fit.train = shim.train;
    a.config.fit.weight = shim.weight;
    if (a.overrides.rec) a.config.regression_weights.rec = *a.overrides.rec;
    if (a.overrides.con) a.config.regression_weights.con = *a.overrides.con;
    if (a.overrides.sep) a.config.regression_weights.sep = *a.overrides.sep;
    if (a.overrides.beta) a.config.regression_weights.beta = *a.overrides.beta;
    if (a.overrides.seed) a.config.seed = *a.overrides.seed;
    if (!a.overrides.strategies.empty()) a.config.strategies = a.overrides.strategies;

    const smc::ExperimentReport report = smc::run_benchmark(a.config);

    const fs::path out = resolve_output_dir(a.overrides.output_dir, "");
    report.write_csv((out / "report.csv").string());
    report.write_json((out / "report.json").string());
    report.write_plot_csv((out / "plot_data.csv").string());
    report.write_timings_csv((out / "timings.csv").string());
    std::cout << "report: " << (out / "report.csv").string() << "\n";
    std::cout << "report-json: " << (out / "report.json").string() << "\n";
    std::cout << "plot-data: " << (out / "plot_data.csv").string() << "\n";
    std::cout << "timings: " << (out / "timings.csv").string() << "\n";
    std::cout << "rows: " << report.rows.size() << "\n";

    if (a.emit_assets) emit_scenario_assets(a.config, out / "assets");
    return 0;
}

// ---------------------------------------------------------------------------
// subsample

struct SubsampleArgs {
    std::string demographics;
    std::string cohort;
    std::string output;
    std::string output_dir;
};

int cmd_subsample(const SubsampleArgs& a) {
    smc::DemographicsTable table = smc::DemographicsTable::load(a.demographics);
    table = smc::impute_missing(table);
    const std::vector<smc::DensityModel> densities = smc::build_cohort_densities(table);

    const smc::PooledCohort cohort = smc::PooledCohort::read_csv(a.cohort);
    if (cohort.features.cols() != table.n_covariates())
        throw std::invalid_argument("cohort has " + std::to_string(cohort.features.cols()) +
                                    " covariates, demographics table has " +
                                    std::to_string(table.n_covariates()));
    for (int o : cohort.origin)
        if (o >= table.n_models())
            throw std::invalid_argument("cohort origin " + std::to_string(o) +
                                        " out of range for " + std::to_string(table.n_models()) +
                                        " models");

    const smc::PooledCohort kept = smc::rejection_subsample(cohort, densities);

    const fs::path out = resolve_output_dir(a.output_dir, "");
    const std::string out_path = a.output.empty() ? (out / "subsampled.csv").string() : a.output;
    kept.write_csv(out_path, table.covariates);

    std::vector<long> total(static_cast<size_t>(table.n_models()), 0);
    std::vector<long> survived(static_cast<size_t>(table.n_models()), 0);
    for (int o : cohort.origin) ++total[static_cast<size_t>(o)];
    for (int o : kept.origin) ++survived[static_cast<size_t>(o)];
    for (int j = 0; j < table.n_models(); ++j)
        std::cout << "model " << table.model_ids[static_cast<size_t>(j)] << ": kept "
                  << survived[static_cast<size_t>(j)] << " / " << total[static_cast<size_t>(j)] << "\n";
    std::cout << "subsampled: " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// balance

struct BalanceArgs {
    std::string config_path;
    double threshold = 0.025;
    Overrides overrides;
};

int cmd_balance(const BalanceArgs& a) {
    PipelineConfig cfg = load_pipeline_config(a.config_path);
    apply_overrides(cfg, a.overrides);
    const std::uint64_t seed = require_seed(cfg);

    const smc::ModelBundle bundle = load_bundle(cfg);
    const smc::Dataset test = load_test_data(cfg);
    const std::vector<smc::DensityModel> densities = smc::fit_feature_densities(bundle);

    // Same substream the fit command trains under, so the returned weights
    // reproduce exactly when fed back into fit.
    const smc::RngStream rng = smc::RngStream(seed).derive("train");
    const smc::BalanceResult result =
        smc::balance_losses(bundle, densities, test, cfg.train, a.threshold, rng);

    json out_json{{"weights",
                   {{"rec", result.weights.rec},
                    {"con", result.weights.con},
                    {"sep", result.weights.sep},
                    {"beta", result.weights.beta}}},
                  {"l_rec_reference", result.l_rec_reference},
                  {"ladder", result.ladder},
                  {"ladder_l_rec", result.ladder_l_rec},
                  {"fell_back", result.fell_back}};

    const fs::path out = resolve_output_dir(a.overrides.output_dir, cfg.output_dir);
    const fs::path out_path = out / "balance.json";
    std::ofstream os(out_path.string());
    if (!os) throw std::invalid_argument("cannot write " + out_path.string());
    os << out_json.dump(2) << "\n";
    os.close();
    std::cout << out_json.dump(2) << "\n";
    std::cout << "balance: " << out_path.string() << "\n";
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"Instance-wise ensembling of pre-trained experts via learned domain densities"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "thread budget for parallel kernels (0 = library default)");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit the representation and latent densities");
    fit->add_option("--config", fit_args.config_path, "pipeline config JSON")->required();
    add_override_flags(fit, fit_args.overrides);

    PredictArgs predict_args;
    CLI::App* predict = app.add_subcommand("predict", "predict with a fitted checkpoint");
    predict->add_option("--config", predict_args.config_path, "pipeline config JSON")->required();
    predict->add_option("--checkpoint", predict_args.checkpoint, "engine checkpoint (default <output-dir>/engine.json)");
    predict->add_option("--input", predict_args.input_csv, "input feature CSV")->required();
    predict->add_option("--output", predict_args.output_csv, "output CSV (default <output-dir>/predictions.csv)");
    add_override_flags(predict, predict_args.overrides);

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run a benchmark scenario and write report files");
    bench->add_option("--scenario", bench_args.config.scenario,
                      "regression-standard | regression-gap | regression-overlap | digits");
    bench->add_option("--seeds", bench_args.config.seeds, "number of consecutive seeds");
    bench->add_option("--info-counts", bench_args.config.info_counts,
                      "digits per-model information sizes (-1 = all)")
        ->delimiter(',');
    bench->add_option("--corpus", bench_args.config.digits_corpus, "digits corpus CSV");
    bench->add_option("--config", bench_args.config_path, "pipeline config JSON for train/weight sections");
    bench->add_flag("--emit-assets", bench_args.emit_assets,
                    "also write expert nets, info files, test CSV and a pipeline config");
    add_override_flags(bench, bench_args.overrides);

    SubsampleArgs subsample_args;
    CLI::App* subsample = app.add_subcommand("subsample", "rejection-subsample a pooled cohort");
    subsample->add_option("--demographics", subsample_args.demographics, "demographics JSON")->required();
    subsample->add_option("--cohort", subsample_args.cohort, "pooled cohort CSV")->required();
    subsample->add_option("--output", subsample_args.output, "output CSV (default <output-dir>/subsampled.csv)");
    subsample->add_option("--output-dir", subsample_args.output_dir, "output directory");

    BalanceArgs balance_args;
    CLI::App* balance = app.add_subcommand("balance", "search loss weights that keep reconstruction intact");
    balance->add_option("--config", balance_args.config_path, "pipeline config JSON")->required();
    balance->add_option("--threshold", balance_args.threshold, "allowed relative reconstruction-loss increase");
    add_override_flags(balance, balance_args.overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (threads > 0) smc::kernels::set_threads(threads);
        if (app.got_subcommand(fit)) return cmd_fit(fit_args);
        if (app.got_subcommand(predict)) return cmd_predict(predict_args);
        if (app.got_subcommand(bench)) return cmd_bench(bench_args);
        if (app.got_subcommand(subsample)) return cmd_subsample(subsample_args);
        if (app.got_subcommand(balance)) return cmd_balance(balance_args);
    } catch (const smc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
