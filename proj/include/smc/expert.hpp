// The expert-model abstraction: opaque pre-trained predictors paired with
// their domain information, grouped into a bundle sharing input dimension
// and output kind.

#ifndef SMC_EXPERT_HPP
#define SMC_EXPERT_HPP

#include "smc/common.hpp"
#include "smc/density.hpp"
#include "smc/nn.hpp"

#include <functional>
#include <string>
#include <vector>

namespace smc {

enum class OutputKind { Regression, Classification };

// Regression: a single scalar. Classification: a dense probability vector
// over classes 0..K-1 (non-negative, sums to 1 within 1e-9).
class Prediction {
public:
    static Prediction regression(double y);
    static Prediction classification(Vector probs);

    OutputKind kind() const { return kind_; }
    double scalar() const;
    const Vector& probs() const;

    // Uniform view: regression as a length-1 vector, classification as probs.
    const Vector& value() const { return value_; }

private:
    Prediction() = default;
    OutputKind kind_ = OutputKind::Regression;
    Vector value_;
};

// Pure predictor with an identity, an output kind and a parameter count
// (the latter feeds the information-criterion baseline).
class ExpertModel {
public:
    ExpertModel(std::string id, OutputKind kind, int input_dim, int num_classes,
                std::function<Prediction(const Vector&)> predictor, int param_count);

    static ExpertModel from_mlp_regressor(std::string id, Mlp net);
    static ExpertModel from_mlp_classifier(std::string id, Mlp net);

    const std::string& id() const { return id_; }
    OutputKind output_kind() const { return kind_; }
    int input_dim() const { return input_dim_; }
    int num_classes() const { return num_classes_; }
    int param_count() const { return param_count_; }

    // Validates the output invariant (simplex membership for classifiers).
    Prediction predict(const Eigen::Ref<const Vector>& x) const;

    // One row per input row; 1 column (regression) or K columns.
    Matrix predict_batch(const Matrix& x) const;

private:
    std::string id_;
    OutputKind kind_;
    int input_dim_;
    int num_classes_;  // 0 for regression
    std::function<Prediction(const Vector&)> predictor_;
    int param_count_;
};

// N experts with their domain information; all share d and output kind.
class ModelBundle {
public:
    struct Entry {
        ExpertModel model;
        ModelInfo info;
    };

    explicit ModelBundle(std::vector<Entry> entries);

    int size() const { return static_cast<int>(entries_.size()); }
    const ExpertModel& model(int j) const { return entries_.at(static_cast<size_t>(j)).model; }
    const ModelInfo& info(int j) const { return entries_.at(static_cast<size_t>(j)).info; }

    Eigen::Index dim() const { return dim_; }
    OutputKind output_kind() const { return kind_; }
    int num_classes() const { return num_classes_; }

private:
    std::vector<Entry> entries_;
    Eigen::Index dim_ = 0;
    OutputKind kind_ = OutputKind::Regression;
    int num_classes_ = 0;
};

// Fit each entry's information into a feature-space density.
std::vector<DensityModel> fit_feature_densities(const ModelBundle& bundle);

}  // namespace smc

#endif  // SMC_EXPERT_HPP
