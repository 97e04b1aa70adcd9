// Cohort tooling: densities from published demographic summaries, imputation
// of missing cells, and rejection subsampling of a pooled cohort so each
// model keeps only instances plausible under its own demographics.

#ifndef SMC_COHORT_HPP
#define SMC_COHORT_HPP

#include "smc/dataset.hpp"
#include "smc/density.hpp"

#include <string>
#include <vector>

namespace smc {

// Per-model rows of per-covariate summary statistics; cells may be missing.
struct DemographicsTable {
    struct Cell {
        bool missing = true;
        double mean = 0.0;
        double std = 0.0;  // continuous
        double p = 0.0;    // binary
    };

    std::vector<std::string> covariates;
    std::vector<DimKind> covariate_kinds;
    std::vector<std::string> model_ids;
    std::vector<std::vector<Cell>> cells;  // [model][covariate]

    int n_models() const { return static_cast<int>(model_ids.size()); }
    int n_covariates() const { return static_cast<int>(covariates.size()); }

    // JSON: {"covariates":[{"name":..,"type":"continuous"|"binary"},...],
    //        "models":{"<id>":{"<covariate>":{"mean":..,"std":..}|{"p":..}|null,...},...}}
    static DemographicsTable from_json(const std::string& text);
    static DemographicsTable load(const std::string& path);
    std::string to_json() const;

    void validate() const;
};

// Fill every missing cell with the across-model average of that covariate's
// non-missing statistics (means and stds averaged independently; binary p
// likewise). Errors if a covariate is missing everywhere.
DemographicsTable impute_missing(const DemographicsTable& table);

// One factorised density per model row; the table must be fully imputed.
std::vector<DensityModel> build_cohort_densities(const DemographicsTable& table);

// A pooled simulated cohort with per-instance generating-model labels.
struct PooledCohort {
    Matrix features;
    std::vector<int> origin;

    Eigen::Index size() const { return features.rows(); }

    // CSV with feature columns plus a trailing "__origin__" column.
    static PooledCohort read_csv(const std::string& path);
    void write_csv(const std::string& path, const std::vector<std::string>& feature_names = {}) const;
};

// Keep instance i iff argmax_j log_density_j(x_i) equals origin_i (ties
// broken by the lowest model index). Pure order-preserving filter.
PooledCohort rejection_subsample(const PooledCohort& cohort, const std::vector<DensityModel>& densities);

}  // namespace smc

#endif  // SMC_COHORT_HPP
