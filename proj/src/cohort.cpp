#include "smc/cohort.hpp"

#include "json.hpp"

#include <fstream>

namespace smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// DemographicsTable

void DemographicsTable::validate() const {
    require(!covariates.empty(), "DemographicsTable: no covariates");
    require(covariate_kinds.size() == covariates.size(), "DemographicsTable: kind list length mismatch");
    require(!model_ids.empty(), "DemographicsTable: no models");
    require(cells.size() == model_ids.size(), "DemographicsTable: cell row count mismatch");
    for (size_t m = 0; m < cells.size(); ++m) {
        require(cells[m].size() == covariates.size(),
                "DemographicsTable: cell column count mismatch for model " + model_ids[m]);
        for (size_t c = 0; c < cells[m].size(); ++c) {
            const Cell& cell = cells[m][c];
            if (cell.missing) continue;
            if (covariate_kinds[c] == DimKind::Continuous)
                require(cell.std > 0.0, "DemographicsTable: std must be > 0 for " + model_ids[m] + "/" + covariates[c]);
            else
                require(cell.p >= 0.0 && cell.p <= 1.0,
                        "DemographicsTable: p outside [0,1] for " + model_ids[m] + "/" + covariates[c]);
        }
    }
}

DemographicsTable DemographicsTable::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("DemographicsTable: JSON parse error: ") + e.what());
    }
    DemographicsTable table;
    require(j.contains("covariates") && j["covariates"].is_array() && !j["covariates"].empty(),
            "DemographicsTable: missing covariates");
    for (const json& cj : j["covariates"]) {
        table.covariates.push_back(cj.at("name").get<std::string>());
        const std::string type = cj.at("type").get<std::string>();
        if (type == "continuous")
            table.covariate_kinds.push_back(DimKind::Continuous);
        else if (type == "binary")
            table.covariate_kinds.push_back(DimKind::Binary);
        else
            throw std::invalid_argument("DemographicsTable: unknown covariate type \"" + type + "\"");
    }
    require(j.contains("models") && j["models"].is_object() && !j["models"].empty(),
            "DemographicsTable: missing models");
    for (const auto& [id, row] : j["models"].items()) {
        table.model_ids.push_back(id);
        std::vector<Cell> cells;
        for (size_t c = 0; c < table.covariates.size(); ++c) {
            Cell cell;
            if (row.contains(table.covariates[c]) && !row[table.covariates[c]].is_null()) {
                const json& cj = row[table.covariates[c]];
                cell.missing = false;
                if (table.covariate_kinds[c] == DimKind::Continuous) {
                    cell.mean = cj.at("mean").get<double>();
                    cell.std = cj.at("std").get<double>();
                } else {
                    cell.p = cj.at("p").get<double>();
                }
            }
            cells.push_back(cell);
        }
        table.cells.push_back(std::move(cells));
    }
    table.validate();
    return table;
}

DemographicsTable DemographicsTable::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "DemographicsTable: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string DemographicsTable::to_json() const {
    json j;
    json covs = json::array();
    for (size_t c = 0; c < covariates.size(); ++c)
        covs.push_back({{"name", covariates[c]},
                        {"type", covariate_kinds[c] == DimKind::Continuous ? "continuous" : "binary"}});
    j["covariates"] = std::move(covs);
    json models = json::object();
    for (size_t m = 0; m < model_ids.size(); ++m) {
        json row = json::object();
        for (size_t c = 0; c < covariates.size(); ++c) {
            const Cell& cell = cells[m][c];
            if (cell.missing)
                row[covariates[c]] = nullptr;
            else if (covariate_kinds[c] == DimKind::Continuous)
                row[covariates[c]] = {{"mean", cell.mean}, {"std", cell.std}};
            else
                row[covariates[c]] = {{"p", cell.p}};
        }
        models[model_ids[m]] = std::move(row);
    }
    j["models"] = std::move(models);
    return j.dump(2);
}

DemographicsTable impute_missing(const DemographicsTable& table) {
    table.validate();
    DemographicsTable out = table;
    for (int c = 0; c < table.n_covariates(); ++c) {
        double sum_mean = 0.0, sum_std = 0.0, sum_p = 0.0;
        int present = 0;
        for (int m = 0; m < table.n_models(); ++m) {
            const auto& cell = table.cells[static_cast<size_t>(m)][static_cast<size_t>(c)];
            if (cell.missing) continue;
            ++present;
            sum_mean += cell.mean;
            sum_std += cell.std;
            sum_p += cell.p;
        }
        require(present >= 1, "impute_missing: covariate \"" + table.covariates[static_cast<size_t>(c)] +
                                  "\" missing for every model");
        for (int m = 0; m < table.n_models(); ++m) {
            auto& cell = out.cells[static_cast<size_t>(m)][static_cast<size_t>(c)];
            if (!cell.missing) continue;
            cell.missing = false;
            cell.mean = sum_mean / present;
            cell.std = sum_std / present;
            cell.p = sum_p / present;
        }
    }
    return out;
}

std::vector<DensityModel> build_cohort_densities(const DemographicsTable& table) {
    table.validate();
    std::vector<DensityModel> out;
    for (int m = 0; m < table.n_models(); ++m) {
        std::vector<MomentDim> dims;
        for (int c = 0; c < table.n_covariates(); ++c) {
            const auto& cell = table.cells[static_cast<size_t>(m)][static_cast<size_t>(c)];
            require(!cell.missing, "build_cohort_densities: table not fully imputed (" +
                                       table.model_ids[static_cast<size_t>(m)] + "/" +
                                       table.covariates[static_cast<size_t>(c)] + ")");
            MomentDim dim;
            dim.kind = table.covariate_kinds[static_cast<size_t>(c)];
            dim.mean = cell.mean;
            dim.std = cell.std;
            dim.p = cell.p;
            dims.push_back(dim);
        }
        out.push_back(DensityModel::fit_factorised(dims));
    }
    return out;
}

// ---------------------------------------------------------------------------
// PooledCohort

PooledCohort PooledCohort::read_csv(const std::string& path) {
    const CsvTable table = ::smc::read_csv(path);
    int origin_col = -1;
    for (size_t c = 0; c < table.columns.size(); ++c)
        if (table.columns[c] == "__origin__") origin_col = static_cast<int>(c);
    require(origin_col >= 0, "PooledCohort: missing __origin__ column in " + path);
    require(table.columns.size() >= 2, "PooledCohort: no feature columns in " + path);

    PooledCohort cohort;
    cohort.features.resize(table.values.rows(), table.values.cols() - 1);
    cohort.origin.resize(static_cast<size_t>(table.values.rows()));
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        Eigen::Index f = 0;
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            if (static_cast<int>(c) == origin_col) {
                const double v = table.values(i, c);
                require(v == std::floor(v) && v >= 0.0, "PooledCohort: non-integer origin at row " +
                                                            std::to_string(i + 2));
                cohort.origin[static_cast<size_t>(i)] = static_cast<int>(v);
            } else {
                cohort.features(i, f++) = table.values(i, c);
            }
        }
    }
    require(all_finite(cohort.features), "PooledCohort: non-finite features in " + path);
    return cohort;
}

void PooledCohort::write_csv(const std::string& path, const std::vector<std::string>& feature_names) const {
    require(feature_names.empty() || static_cast<Eigen::Index>(feature_names.size()) == features.cols(),
            "PooledCohort: feature name count mismatch");
    std::ofstream out(path);
    require(out.good(), "PooledCohort: cannot write " + path);
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        if (c) out << ',';
        if (feature_names.empty())
            out << "f" << c;
        else
            out << feature_names[static_cast<size_t>(c)];
    }
    out << ",__origin__\n";
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index c = 0; c < features.cols(); ++c) out << format_double(features(i, c)) << ',';
        out << origin[static_cast<size_t>(i)] << '\n';
    }
}

PooledCohort rejection_subsample(const PooledCohort& cohort, const std::vector<DensityModel>& densities) {
    require(!densities.empty(), "rejection_subsample: no densities");
    require(cohort.origin.size() == static_cast<size_t>(cohort.size()),
            "rejection_subsample: origin length mismatch");
    const int n_models = static_cast<int>(densities.size());
    for (const DensityModel& d : densities)
        require(d.dim() == cohort.features.cols(), "rejection_subsample: dimension mismatch");
    for (int o : cohort.origin)
        require(o >= 0 && o < n_models, "rejection_subsample: origin index out of range");

    // Log-likelihood of every instance under every model, then an argmax per
    // instance with ties to the lowest index.
    Matrix log_liks(cohort.size(), n_models);
    for (int j = 0; j < n_models; ++j)
        log_liks.col(j) = densities[static_cast<size_t>(j)].log_density_batch(cohort.features);

    std::vector<int> kept;
    for (Eigen::Index i = 0; i < cohort.size(); ++i) {
        int best = 0;
        for (int j = 1; j < n_models; ++j)
            if (log_liks(i, j) > log_liks(i, best)) best = j;
        if (best == cohort.origin[static_cast<size_t>(i)]) kept.push_back(static_cast<int>(i));
    }

    PooledCohort out;
    out.features.resize(static_cast<Eigen::Index>(kept.size()), cohort.features.cols());
    out.origin.resize(kept.size());
    for (size_t k = 0; k < kept.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = cohort.features.row(kept[k]);
        out.origin[k] = cohort.origin[static_cast<size_t>(kept[k])];
    }
    return out;
}

}  // namespace smc
