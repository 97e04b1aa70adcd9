#include "smc/dataset.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace smc {

Dataset::Dataset(Matrix features, std::optional<Vector> targets)
    : features_(std::move(features)), targets_(std::move(targets)) {
    require(features_.rows() >= 0 && features_.cols() >= 1,
            "Dataset: features need at least one dimension");
    require(features_.allFinite(), "Dataset: non-finite feature entry");
    if (targets_) {
        require(targets_->size() == features_.rows(),
                "Dataset: target length does not match row count");
        require(targets_->allFinite(), "Dataset: non-finite target entry");
    }
}

const Vector& Dataset::targets() const {
    require(targets_.has_value(), "Dataset: no targets present");
    return *targets_;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
    Matrix f(static_cast<Eigen::Index>(indices.size()), features_.cols());
    std::optional<Vector> t;
    if (targets_) t = Vector(static_cast<Eigen::Index>(indices.size()));
    for (size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] >= 0 && indices[i] < features_.rows(), "Dataset::subset: index out of range");
        f.row(static_cast<Eigen::Index>(i)) = features_.row(indices[i]);
        if (t) (*t)(static_cast<Eigen::Index>(i)) = (*targets_)(indices[i]);
    }
    return Dataset(std::move(f), std::move(t));
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, size_t line_no, size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": column " +
                                    std::to_string(col + 1) + ": not a number: '" + cell + "'");
    }
    return v;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file, header row required");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvTable table;
    table.columns = split_line(line);
    require(!table.columns.empty(), path + ": header row has no columns");

    std::vector<double> cells;
    size_t rows = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto parts = split_line(line);
        if (parts.size() != table.columns.size()) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(table.columns.size()) + " cells, got " +
                                        std::to_string(parts.size()));
        }
        for (size_t c = 0; c < parts.size(); ++c) cells.push_back(parse_cell(parts[c], path, line_no, c));
        ++rows;
    }

    table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(table.columns.size()));
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < table.columns.size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cells[r * table.columns.size() + c];
    return table;
}

Dataset read_dataset_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    Eigen::Index target_col = -1;
    for (size_t c = 0; c < table.columns.size(); ++c)
        if (table.columns[c] == "__target__") target_col = static_cast<Eigen::Index>(c);

    if (target_col < 0) return Dataset(table.values);

    Matrix features(table.values.rows(), table.values.cols() - 1);
    Vector targets(table.values.rows());
    Eigen::Index fc = 0;
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
        if (c == target_col) {
            targets = table.values.col(c);
        } else {
            features.col(fc++) = table.values.col(c);
        }
    }
    return Dataset(std::move(features), std::move(targets));
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& feature_names) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write CSV file: " + path);

    require(feature_names.empty() || static_cast<Eigen::Index>(feature_names.size()) == data.dim(),
            "write_dataset_csv: feature name count mismatch");

    for (Eigen::Index c = 0; c < data.dim(); ++c) {
        if (c) out << ',';
        if (feature_names.empty()) {
            out << 'f' << c;
        } else {
            out << feature_names[static_cast<size_t>(c)];
        }
    }
    if (data.has_targets()) out << ",__target__";
    out << '\n';

    for (Eigen::Index r = 0; r < data.size(); ++r) {
        for (Eigen::Index c = 0; c < data.dim(); ++c) {
            if (c) out << ',';
            out << format_double(data.features()(r, c));
        }
        if (data.has_targets()) out << ',' << format_double(data.targets()(r));
        out << '\n';
    }
}

}  // namespace smc
