// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit when
// anything fails. Every check recomputes its expected values independently —
// closed forms, extended-precision sums, scratch reimplementations — rather
// than trusting the code under test.

#include "smc/cohort.hpp"
#include "smc/experiments.hpp"

#include "helpers.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = false;
    std::string detail;
};

int g_failures = 0;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(5) << v;
    return os.str();
}

void run_criterion(int number, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!outcome.ok) ++g_failures;
    std::cout << (outcome.ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << title << " — "
              << outcome.detail << " (" << fmt(seconds) << "s)" << std::endl;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) return {};
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + SMC_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------
// 1. analytic gradients vs central finite differences

Outcome criterion_gradients() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t init = 1; init <= 3; ++init) {
        const smc::ModelBundle bundle = testutil::two_model_bundle(0.0, 20.0, 400 + init);
        const std::vector<smc::DensityModel> densities = smc::fit_feature_densities(bundle);
        smc::RngStream rng(500 + init);
        const smc::ModelSampleBatch batch = smc::ModelSampleBatch::draw(bundle, densities, 6, rng);
        smc::SimilarityConfig sim;
        sim.regression_scale = 2.0;

        smc::LatentMap map = testutil::smooth_random_map(1, 2, 1000 + init);
        worst = std::max(worst, testutil::fd_worst_rel_err(map, [&](const smc::LatentMap& m, smc::MapGrads* g) {
                             return smc::loss_rec(m, batch.points, 0.01, g);
                         }));
        worst = std::max(worst, testutil::fd_worst_rel_err(map, [&](const smc::LatentMap& m, smc::MapGrads* g) {
                             return smc::loss_con(m, batch, smc::OutputKind::Regression, sim, g);
                         }));
        worst = std::max(worst, testutil::fd_worst_rel_err(map, [&](const smc::LatentMap& m, smc::MapGrads* g) {
                             return smc::loss_sep(m, batch, g);
                         }));
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return {worst < 1e-4 && seconds < 60.0,
            "worst relative error " + fmt(worst) + " over 3 inits x 3 losses"};
}

// ---------------------------------------------------------------------------
// 2. simplex invariants of the weight arithmetic

Outcome criterion_simplex() {
    smc::RngStream rng(424242);
    double worst_sum = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const int n = 1 + rng.uniform_int(8);
        const double gamma = std::pow(10.0, -9.0 + 9.0 * rng.uniform());
        smc::Vector p(n);
        for (int i = 0; i < n; ++i)
            p(i) = rng.bernoulli(0.1) ? 0.0 : std::exp(5.0 * rng.normal());
        const smc::WeightVector wv = smc::weights_from_densities(p, gamma);

        worst_sum = std::max(worst_sum, std::abs(wv.weights.sum() - 1.0));
        if (std::abs(wv.weights.sum() - 1.0) > 1e-9) return {false, "weights stopped summing to one"};
        if (wv.weights.minCoeff() < 0.0) return {false, "negative weight"};
        if (wv.confidence != p.sum()) return {false, "confidence is not the density sum"};

        const int k = rng.uniform_int(n);
        smc::Vector bumped = p;
        bumped(k) += std::exp(rng.normal());
        const smc::WeightVector wv2 = smc::weights_from_densities(bumped, gamma);
        if (wv2.weights(k) < wv.weights(k) - 1e-15)
            return {false, "weight " + std::to_string(k) + " fell when its density rose"};
    }

    // the engine-level call is the same arithmetic applied to latent densities
    smc::RngStream srng(77);
    const smc::Matrix s0 = testutil::random_matrix(30, 2, srng, 1.0);
    const smc::Matrix s1 = testutil::random_matrix(30, 2, srng, 1.0).array() + 4.0;
    smc::LatentDensitySet set{{smc::DensityModel::fit_kde(s0), smc::DensityModel::fit_kde(s1)}, 30};
    const smc::LatentMap id = testutil::identity_map(2);
    for (int t = 0; t < 1000; ++t) {
        smc::Vector x(2);
        x << -3.0 + 10.0 * srng.uniform(), -3.0 + 10.0 * srng.uniform();
        const smc::WeightVector wv = smc::compute_weights(set, id, x, 1e-6);
        smc::Vector p(2);
        for (int j = 0; j < 2; ++j) p(j) = std::exp(set.densities[static_cast<size_t>(j)].log_density(x));
        const smc::WeightVector direct = smc::weights_from_densities(p, 1e-6);
        if ((wv.weights - direct.weights).cwiseAbs().maxCoeff() > 1e-12)
            return {false, "engine weights disagree with the density arithmetic"};
        if (std::abs(wv.weights.sum() - 1.0) > 1e-9 || wv.weights.minCoeff() < 0.0)
            return {false, "engine weights left the simplex"};
    }
    return {true, "10000 simplex draws + 1000 engine calls, worst |sum-1| " + fmt(worst_sum)};
}

// ---------------------------------------------------------------------------
// 3-5. regression scenarios over 5 seeds

Outcome criterion_regression_standard() {
    const auto t0 = Clock::now();
    smc::BenchConfig config;
    config.scenario = "regression-standard";
    config.seeds = 5;
    const smc::ExperimentReport report = smc::run_benchmark(config);
    const double s = report.seed_mean("smc", "rmse");
    const double g = report.seed_mean("global-average", "rmse");
    const double o = report.seed_mean("oracle", "rmse");
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return {s < 0.5 * g && s < 2.0 * o && seconds < 300.0,
            "rmse " + fmt(s) + " vs global-average " + fmt(g) + " and oracle " + fmt(o)};
}

Outcome criterion_regression_gap() {
    const auto t0 = Clock::now();
    smc::BenchConfig config;
    config.scenario = "regression-gap";
    config.seeds = 5;
    const smc::ExperimentReport report = smc::run_benchmark(config);
    const double gap = report.seed_mean("smc", "mean_confidence_x_8_12");
    const double core = report.seed_mean("smc", "mean_confidence_x_m2_2");
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return {gap < 0.1 * core && seconds < 300.0,
            "confidence " + fmt(gap) + " in the no-data region vs " + fmt(core) + " in a covered one"};
}

Outcome criterion_regression_overlap() {
    const auto t0 = Clock::now();
    smc::BenchConfig config;
    config.scenario = "regression-overlap";
    config.seeds = 5;
    const smc::ExperimentReport report = smc::run_benchmark(config);
    const double s = report.seed_mean("smc", "rmse");
    const double g = report.seed_mean("global-average", "rmse");
    const double rel = std::abs(s - g) / g;
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return {rel < 0.15 && seconds < 300.0,
            "identical-domain rmse gap " + fmt(100.0 * rel) + "% (smc " + fmt(s) + ", global-average " + fmt(g) + ")"};
}

// ---------------------------------------------------------------------------
// 6-7. digits sweep (shared report)

std::optional<smc::ExperimentReport> g_digits_report;

Outcome criterion_digits() {
    const auto t0 = Clock::now();
    smc::BenchConfig config;
    config.scenario = "digits";
    config.seeds = 5;
    config.digits_corpus = std::string(SMC_SOURCE_DIR) + "/data/digits_8x8.csv";
    g_digits_report = smc::run_benchmark(config);
    const smc::ExperimentReport& report = *g_digits_report;

    const double full = report.seed_mean("smc", "auroc_cfull");
    const double c3 = report.seed_mean("smc", "auroc_c3");
    const double c4 = report.seed_mean("smc", "auroc_c4");
    const double c64 = report.seed_mean("smc", "auroc_c64");
    const double rec_full = report.seed_mean("smc-rec", "auroc_cfull");
    const double majority = report.seed_mean("majority-vote", "auroc");
    const double entropy = report.seed_mean("entropy-weighted", "auroc");
    const double baseline = std::max(majority, entropy);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    const bool ok = full > 0.90 && c3 > 0.70 && c64 >= c4 && full > baseline && rec_full > baseline &&
                    seconds < 1800.0;
    return {ok, "auroc full " + fmt(full) + ", c3 " + fmt(c3) + ", c4 " + fmt(c4) + ", c64 " + fmt(c64) +
                    "; rec-only full " + fmt(rec_full) + "; majority " + fmt(majority) + ", entropy " +
                    fmt(entropy)};
}

Outcome criterion_ablation() {
    if (!g_digits_report) return {false, "digits benchmark unavailable"};
    const smc::ExperimentReport& report = *g_digits_report;
    const double full = report.seed_mean("smc", "auroc_cfull");
    const double rec_full = report.seed_mean("smc-rec", "auroc_cfull");
    const double sep_full = report.seed_mean("smc", "latent_separation_cfull");
    const double sep_rec = report.seed_mean("smc-rec", "latent_separation_cfull");
    const bool ok = full >= rec_full - 0.005 && sep_full > sep_rec;
    return {ok, "auroc " + fmt(full) + " vs rec-only " + fmt(rec_full) + "; latent separation " +
                    fmt(sep_full) + " vs " + fmt(sep_rec)};
}

// ---------------------------------------------------------------------------
// 8. density values vs extended-precision summation; unit mass in 1-D

long double kde_log_density_ld(const smc::Matrix& support, const smc::Vector& bandwidth,
                               const smc::Vector& q) {
    constexpr long double kHalfLog2Pi = 0.918938533204672741780329736406L;
    long double log_const = 0.0L;
    for (Eigen::Index k = 0; k < bandwidth.size(); ++k)
        log_const -= logl(static_cast<long double>(bandwidth(k))) + kHalfLog2Pi;
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
        long double e = 0.0L;
        for (Eigen::Index k = 0; k < bandwidth.size(); ++k) {
            const long double t =
                (static_cast<long double>(q(k)) - static_cast<long double>(support(i, k))) /
                static_cast<long double>(bandwidth(k));
            e -= 0.5L * t * t;
        }
        sum += expl(e);
    }
    return logl(sum / static_cast<long double>(support.rows())) + log_const;
}

long double factorised_log_density_ld(const std::vector<smc::MomentDim>& dims, const smc::Vector& q) {
    constexpr long double kHalfLog2Pi = 0.918938533204672741780329736406L;
    long double acc = 0.0L;
    for (size_t k = 0; k < dims.size(); ++k) {
        const long double x = static_cast<long double>(q(static_cast<Eigen::Index>(k)));
        if (dims[k].kind == smc::DimKind::Continuous) {
            const long double t = (x - static_cast<long double>(dims[k].mean)) /
                                  static_cast<long double>(dims[k].std);
            acc += -0.5L * t * t - logl(static_cast<long double>(dims[k].std)) - kHalfLog2Pi;
        } else {
            acc += logl(x == 1.0L ? static_cast<long double>(dims[k].p)
                                  : 1.0L - static_cast<long double>(dims[k].p));
        }
    }
    return acc;
}

template <typename Density>
double integral_1d(const Density& density, double lo, double hi, int points) {
    const double step = (hi - lo) / (points - 1);
    double acc = 0.0;
    smc::Vector q(1);
    for (int i = 0; i < points; ++i) {
        q(0) = lo + step * i;
        const double mass = std::exp(density.log_density(q));
        acc += (i == 0 || i == points - 1) ? 0.5 * mass : mass;
    }
    return acc * step;
}

Outcome criterion_density_oracles() {
    smc::RngStream rng(888);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int d = 1 + rng.uniform_int(4);
        const int n = 2 + rng.uniform_int(39);
        smc::Matrix samples = testutil::random_matrix(n, d, rng, 0.5 + 2.5 * rng.uniform());
        for (int k = 0; k < d; ++k) samples.col(k).array() += 4.0 * rng.normal();
        const smc::DensityModel kde = smc::DensityModel::fit_kde(samples);

        smc::Vector q(d);
        const Eigen::Index anchor = rng.uniform_int(n);
        for (int k = 0; k < d; ++k) q(k) = samples(anchor, k) + 2.0 * kde.bandwidth()(k) * rng.normal();
        const double diff = std::abs(
            kde.log_density(q) -
            static_cast<double>(kde_log_density_ld(kde.support(), kde.bandwidth(), q)));
        worst = std::max(worst, diff);
    }
    for (int t = 0; t < 50; ++t) {
        const int d = 1 + rng.uniform_int(5);
        std::vector<smc::MomentDim> dims;
        smc::Vector q(d);
        for (int k = 0; k < d; ++k) {
            smc::MomentDim dim;
            if (rng.bernoulli(0.3)) {
                dim.kind = smc::DimKind::Binary;
                dim.p = 0.05 + 0.9 * rng.uniform();
                q(k) = rng.bernoulli(0.5) ? 1.0 : 0.0;
            } else {
                dim.mean = 3.0 * rng.normal();
                dim.std = 0.4 + 2.0 * rng.uniform();
                q(k) = dim.mean + 3.0 * dim.std * rng.normal();
            }
            dims.push_back(dim);
        }
        const smc::DensityModel fac = smc::DensityModel::fit_factorised(dims);
        const double diff =
            std::abs(fac.log_density(q) - static_cast<double>(factorised_log_density_ld(dims, q)));
        worst = std::max(worst, diff);
    }
    if (worst > 1e-10) return {false, "log-density drifted " + fmt(worst) + " from the long-double sum"};

    smc::Matrix s(15, 1);
    for (int i = 0; i < 15; ++i) s(i, 0) = (i < 8 ? -2.0 : 3.0) + rng.normal();
    const smc::DensityModel kde = smc::DensityModel::fit_kde(s);
    const double h = kde.bandwidth()(0);
    const double kde_mass =
        integral_1d(kde, s.minCoeff() - 10.0 * h, s.maxCoeff() + 10.0 * h, 200001);

    smc::MomentDim dim;
    dim.mean = 1.3;
    dim.std = 0.7;
    const smc::DensityModel fac = smc::DensityModel::fit_factorised({dim});
    const double fac_mass = integral_1d(fac, dim.mean - 12.0 * dim.std, dim.mean + 12.0 * dim.std, 200001);

    if (kde_mass < 0.999 || kde_mass > 1.001 || fac_mass < 0.999 || fac_mass > 1.001)
        return {false, "unit mass violated: kde " + fmt(kde_mass) + ", factorised " + fmt(fac_mass)};
    return {true, "100 cases within " + fmt(worst) + "; integrals " + fmt(kde_mass) + " and " + fmt(fac_mass)};
}

// ---------------------------------------------------------------------------
// 9. rejection subsampler vs a scratch reimplementation

Outcome criterion_subsampler() {
    smc::RngStream rng(99);
    const int per_model = 200;
    smc::PooledCohort cohort;
    cohort.features.resize(2 * per_model, 1);
    for (int i = 0; i < per_model; ++i) {
        cohort.features(i, 0) = rng.normal();
        cohort.origin.push_back(0);
    }
    for (int i = 0; i < per_model; ++i) {
        cohort.features(per_model + i, 0) = 10.0 + rng.normal();
        cohort.origin.push_back(1);
    }

    smc::MomentDim lo, hi;
    lo.mean = 0.0;
    hi.mean = 10.0;
    const std::vector<smc::DensityModel> densities{smc::DensityModel::fit_factorised({lo}),
                                                   smc::DensityModel::fit_factorised({hi})};
    const smc::PooledCohort kept = smc::rejection_subsample(cohort, densities);

    // scratch keep rule: stay only when the best-scoring population is yours
    const auto log_pdf = [](double x, double mu) {
        return -0.5 * (x - mu) * (x - mu) - 0.5 * std::log(2.0 * M_PI);
    };
    std::vector<Eigen::Index> expect_rows;
    for (Eigen::Index i = 0; i < cohort.size(); ++i) {
        const double x = cohort.features(i, 0);
        const int best = log_pdf(x, 10.0) > log_pdf(x, 0.0) ? 1 : 0;
        if (best == cohort.origin[static_cast<size_t>(i)]) expect_rows.push_back(i);
    }
    if (kept.size() != static_cast<Eigen::Index>(expect_rows.size()))
        return {false, "kept " + std::to_string(kept.size()) + " rows, scratch rule kept " +
                           std::to_string(expect_rows.size())};
    for (size_t r = 0; r < expect_rows.size(); ++r) {
        if (kept.features(static_cast<Eigen::Index>(r), 0) != cohort.features(expect_rows[r], 0) ||
            kept.origin[r] != cohort.origin[static_cast<size_t>(expect_rows[r])])
            return {false, "row " + std::to_string(r) + " differs from the scratch rule"};
    }

    const smc::PooledCohort again = smc::rejection_subsample(kept, densities);
    if (again.size() != kept.size() || again.origin != kept.origin ||
        (again.features - kept.features).cwiseAbs().maxCoeff() != 0.0)
        return {false, "subsampling its own output changed it"};

    const double kept_fraction = static_cast<double>(kept.size()) / cohort.size();
    Eigen::Index within = 0;
    for (Eigen::Index i = 0; i < kept.size(); ++i) {
        const double mu = kept.origin[static_cast<size_t>(i)] == 0 ? 0.0 : 10.0;
        if (std::abs(kept.features(i, 0) - mu) <= 3.0) ++within;
    }
    const double within_fraction = static_cast<double>(within) / kept.size();
    return {kept_fraction >= 0.95 && within_fraction >= 0.95,
            "kept " + fmt(100.0 * kept_fraction) + "%, " + fmt(100.0 * within_fraction) +
                "% within three sigma of their population mean"};
}

// ---------------------------------------------------------------------------
// 10. information-criterion weighting

Outcome criterion_bma() {
    smc::Vector bic(2);
    bic << 0.0, 2.0;
    const smc::Vector w = smc::bma_weights_from_bic(bic);
    if (std::abs(w(0) - 0.7311) > 1e-4 || std::abs(w(1) - 0.2689) > 1e-4)
        return {false, "bic [0,2] mapped to [" + fmt(w(0)) + ", " + fmt(w(1)) + "]"};

    smc::RngStream rng(1010);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + rng.uniform_int(5);
        smc::Vector b(n);
        for (int i = 0; i < n; ++i) b(i) = 30.0 * rng.normal();
        smc::Vector naive(n);
        for (int i = 0; i < n; ++i) naive(i) = std::exp(-0.5 * b(i));
        if (!naive.allFinite() || naive.sum() <= 0.0) continue;  // naive path overflowed; skip
        naive /= naive.sum();
        worst = std::max(worst, (smc::bma_weights_from_bic(b) - naive).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-12, "[0.7311, 0.2689] reproduced; log-space vs naive within " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 11. benchmark determinism through the command line

Outcome criterion_determinism() {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "smc_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string base = "bench --scenario regression-standard --seeds 1 --seed 3 --output-dir ";
    if (run_cli(base + "\"" + (root / "run1").string() + "\"") != 0) return {false, "first run failed"};
    if (run_cli(base + "\"" + (root / "run2").string() + "\"") != 0) return {false, "second run failed"};
    for (const char* name : {"report.csv", "report.json", "plot_data.csv"}) {
        const std::string a = slurp(root / "run1" / name);
        if (a.empty()) return {false, std::string(name) + " is missing or empty"};
        if (a != slurp(root / "run2" / name)) return {false, std::string(name) + " differs between runs"};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return {seconds < 300.0, "report.csv, report.json and plot_data.csv byte-identical"};
}

}  // namespace

int main() {
    std::cout << "acceptance suite" << std::endl;
    run_criterion(1, "analytic gradients match finite differences", criterion_gradients);
    run_criterion(2, "instance weights stay on the simplex and respond monotonically", criterion_simplex);
    run_criterion(3, "standard regression: instance-wise weighting beats global averaging",
                  criterion_regression_standard);
    run_criterion(4, "gap regression: confidence collapses where no model has data",
                  criterion_regression_gap);
    run_criterion(5, "overlap regression: no penalty when domains coincide", criterion_regression_overlap);
    run_criterion(6, "digit specialists: routed ensemble beats voting and entropy weighting",
                  criterion_digits);
    run_criterion(7, "pair losses keep accuracy and increase latent separation", criterion_ablation);
    run_criterion(8, "densities match extended-precision sums and integrate to one",
                  criterion_density_oracles);
    run_criterion(9, "rejection subsampler matches a scratch reimplementation", criterion_subsampler);
    run_criterion(10, "information-criterion weights match closed forms", criterion_bma);
    run_criterion(11, "benchmark reports are byte-identical across reruns", criterion_determinism);

    std::cout << "acceptance: " << (11 - g_failures) << "/11 criteria passed" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
