// Dataset container and CSV serialization.
//
// CSV convention: header row required; a column named "__target__" (when
// present) holds the target, every other column is a feature in declaration
// order. The cohort tooling additionally uses an "__origin__" column.

#ifndef SMC_DATASET_HPP
#define SMC_DATASET_HPP

#include "smc/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smc {

class Dataset {
public:
    Dataset(Matrix features, std::optional<Vector> targets = std::nullopt);

    const Matrix& features() const { return features_; }
    bool has_targets() const { return targets_.has_value(); }
    const Vector& targets() const;

    Eigen::Index size() const { return features_.rows(); }
    Eigen::Index dim() const { return features_.cols(); }

    Vector row(Eigen::Index i) const { return features_.row(i).transpose(); }

    // Row subset in the given order (targets carried along when present).
    Dataset subset(const std::vector<int>& indices) const;

private:
    Matrix features_;
    std::optional<Vector> targets_;
};

struct CsvTable {
    std::vector<std::string> columns;
    Matrix values;  // parsed numeric cells, same shape as the file body
};

CsvTable read_csv(const std::string& path);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& feature_names = {});

// Shortest exact decimal representation; round-trips bit-exactly.
std::string format_double(double v);

}  // namespace smc

#endif  // SMC_DATASET_HPP
