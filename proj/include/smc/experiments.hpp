// Reproducible desk-scale benchmark scenarios: two-domain sin-wave
// regression, ten-specialist digit classification, expert training, and the
// report/plot writers used by the bench command.

#ifndef SMC_EXPERIMENTS_HPP
#define SMC_EXPERIMENTS_HPP

#include "smc/pipeline.hpp"

#include <string>
#include <vector>

namespace smc {

// ---------------------------------------------------------------------------
// Expert training helpers

// Inputs are standardised for training and the affine map is baked into the
// first layer, so the returned net consumes raw features.
Mlp train_regressor(const Matrix& x, const Vector& y, const std::vector<int>& hidden, int steps,
                    double lr, RngStream& rng);

// Cross-entropy training on logits; the returned net ends in softmax and
// consumes raw features (inputs are scaled by 1/input_scale internally).
Mlp train_classifier(const Matrix& x, const std::vector<int>& labels, int num_classes,
                     const std::vector<int>& hidden, int steps, double lr, double input_scale,
                     RngStream& rng);

// ---------------------------------------------------------------------------
// Regression scenarios

enum class RegressionVariant { Standard, Gap, Overlap };

RegressionVariant regression_variant_from_name(const std::string& name);
std::string regression_variant_name(RegressionVariant variant);

struct RegressionScenarioConfig {
    int train_per_model = 200;
    int test_size = 400;
    double domain_std = 3.5;
    double noise_std = 0.1;
    int expert_steps = 2000;
    double expert_lr = 1e-2;
};

struct RegressionScenario {
    ModelBundle bundle;             // two sin-wave regressors with sample info
    std::vector<Dataset> train;     // per-model training data
    Dataset test;                   // features uniform over the joint domain
    std::vector<double> centers;
    double domain_std = 3.5;
    std::vector<Mlp> nets;          // raw expert nets, for asset export
};

// standard: centers (5, 15); gap: (0, 20); overlap: (10, 10). Domains are
// Gaussian with the configured std; targets are sin(x) plus noise; test
// features cover [min center - 5, max center + 5] uniformly.
RegressionScenario make_regression_scenario(RegressionVariant variant, std::uint64_t seed,
                                            const RegressionScenarioConfig& config = {});

// ---------------------------------------------------------------------------
// Digits scenario

// Sentinel meaning "all of each model's training features".
inline constexpr int kFullInfo = -1;

struct DigitsScenarioConfig {
    double test_fraction = 0.2;      // stratified holdout
    double specialty_fraction = 0.9; // share of each split drawn from its own digit
    int expert_steps = 1000;
    double expert_lr = 1e-3;
    std::vector<int> hidden{32};
};

struct DigitsScenario {
    std::vector<ExpertModel> experts;        // one specialist per digit
    std::vector<Matrix> train_features;      // per model, split order
    std::vector<std::vector<int>> train_labels;
    Dataset test;                            // shared held-out evaluation set
    int num_classes = 10;
    std::vector<Mlp> nets;                   // raw expert nets, for asset export
};

DigitsScenario make_digits_scenario(const std::string& corpus_csv, std::uint64_t seed,
                                    const DigitsScenarioConfig& config = {});

// Bundle whose information is the first `info_count` rows of each model's
// training split (kFullInfo = all rows). info_count = 0 is refused: no
// density can be fitted from an empty sample.
ModelBundle digits_bundle(const DigitsScenario& scenario, int info_count);

// Fraction of correct is-the-specialty-digit decisions (argmax == digit
// versus label == digit) over a domain-composition draw from the test set.
double specialist_binary_accuracy(const DigitsScenario& scenario, int model_index, RngStream& rng);

// ---------------------------------------------------------------------------
// Benchmark harness

struct ReportRow {
    std::string scenario;
    std::uint64_t seed;
    std::string strategy;
    std::string metric;
    double value;
};

struct PlotRow {
    std::string scenario;
    std::uint64_t seed;
    double x;
    std::string series;
    double value;
};

struct TimingRow {
    std::string scenario;
    std::uint64_t seed;
    std::string phase;
    double seconds;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<PlotRow> plot;
    std::vector<TimingRow> timings;  // written separately; excluded from the
                                     // deterministic report files

    void append(const ExperimentReport& other);

    // Values of (strategy, metric) across seeds, in row order.
    std::vector<double> values(const std::string& strategy, const std::string& metric) const;
    double seed_mean(const std::string& strategy, const std::string& metric) const;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
    void write_plot_csv(const std::string& path) const;
    void write_timings_csv(const std::string& path) const;
};

struct BenchConfig {
    std::string scenario = "regression-standard";  // regression-{standard,gap,overlap} | digits
    std::uint64_t seed = 1;                        // first seed
    int seeds = 1;                                 // consecutive seeds
    std::vector<int> info_counts{3, 4, 64, kFullInfo};  // digits sweep
    std::vector<std::string> strategies;           // empty = every applicable strategy
    SmcFitConfig fit;                              // shared pipeline config
    // Pair-loss weights for the two-model 1-d scenarios. Their summed pair
    // losses overpower reconstruction at equal weighting (the map stops
    // being an embedding and routing degrades), so the bench fits them with
    // the pair terms scaled to where the reconstruction-threshold search
    // lands; the ten-model digits scenario keeps equal weighting.
    LossWeights regression_weights{1.0, 0.1, 0.1, 1e-3};
    std::string digits_corpus = "data/digits_8x8.csv";
    RegressionScenarioConfig regression;
    DigitsScenarioConfig digits;
};

// Mean pairwise latent distance between different models' stored latent
// support points; the separation readout reported for ablations.
double latent_separation(const LatentDensitySet& latents);

ExperimentReport run_benchmark(const BenchConfig& config);

}  // namespace smc

#endif  // SMC_EXPERIMENTS_HPP
