#include "smc/expert.hpp"

#include <memory>

namespace smc {

Prediction Prediction::regression(double y) {
    require(std::isfinite(y), "Prediction: non-finite regression value");
    Prediction p;
    p.kind_ = OutputKind::Regression;
    p.value_ = Vector::Constant(1, y);
    return p;
}

Prediction Prediction::classification(Vector probs) {
    require(probs.size() >= 2, "Prediction: need at least two classes");
    require(all_finite(probs), "Prediction: non-finite probabilities");
    require(probs.minCoeff() >= 0.0, "Prediction: negative probability");
    require(std::abs(probs.sum() - 1.0) <= 1e-9, "Prediction: probabilities must sum to 1");
    Prediction p;
    p.kind_ = OutputKind::Classification;
    p.value_ = std::move(probs);
    return p;
}

double Prediction::scalar() const {
    require(kind_ == OutputKind::Regression, "Prediction: scalar() on a classification value");
    return value_(0);
}

const Vector& Prediction::probs() const {
    require(kind_ == OutputKind::Classification, "Prediction: probs() on a regression value");
    return value_;
}

ExpertModel::ExpertModel(std::string id, OutputKind kind, int input_dim, int num_classes,
                         std::function<Prediction(const Vector&)> predictor, int param_count)
    : id_(std::move(id)),
      kind_(kind),
      input_dim_(input_dim),
      num_classes_(kind == OutputKind::Classification ? num_classes : 0),
      predictor_(std::move(predictor)),
      param_count_(param_count) {
    require(input_dim_ >= 1, "ExpertModel: input_dim must be >= 1");
    require(kind_ != OutputKind::Classification || num_classes_ >= 2, "ExpertModel: need >= 2 classes");
    require(param_count_ >= 0, "ExpertModel: negative parameter count");
    require(static_cast<bool>(predictor_), "ExpertModel: empty predictor");
}

ExpertModel ExpertModel::from_mlp_regressor(std::string id, Mlp net) {
    require(net.output_dim() == 1, "from_mlp_regressor: net must have one output");
    const int in = net.input_dim();
    const int params = net.param_count();
    auto shared = std::make_shared<Mlp>(std::move(net));
    return ExpertModel(std::move(id), OutputKind::Regression, in, 0,
                       [shared](const Vector& x) { return Prediction::regression(shared->forward(x)(0)); },
                       params);
}

ExpertModel ExpertModel::from_mlp_classifier(std::string id, Mlp net) {
    require(net.output_dim() >= 2, "from_mlp_classifier: net must have >= 2 outputs");
    require(net.layers().back().act == Activation::Softmax, "from_mlp_classifier: final activation must be softmax");
    const int in = net.input_dim();
    const int classes = net.output_dim();
    const int params = net.param_count();
    auto shared = std::make_shared<Mlp>(std::move(net));
    return ExpertModel(std::move(id), OutputKind::Classification, in, classes,
                       [shared](const Vector& x) { return Prediction::classification(shared->forward(x)); },
                       params);
}

Prediction ExpertModel::predict(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == input_dim_, "ExpertModel::predict: dimension mismatch for model " + id_);
    Prediction p = predictor_(x);
    require(p.kind() == kind_, "ExpertModel::predict: predictor returned wrong output kind for model " + id_);
    if (kind_ == OutputKind::Classification)
        require(p.probs().size() == num_classes_, "ExpertModel::predict: wrong class count for model " + id_);
    return p;
}

Matrix ExpertModel::predict_batch(const Matrix& x) const {
    const Eigen::Index cols = kind_ == OutputKind::Regression ? 1 : num_classes_;
    Matrix out(x.rows(), cols);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = predict(x.row(i).transpose()).value().transpose();
    return out;
}

ModelBundle::ModelBundle(std::vector<Entry> entries) : entries_(std::move(entries)) {
    require(!entries_.empty(), "ModelBundle: need at least one model");
    dim_ = entries_[0].model.input_dim();
    kind_ = entries_[0].model.output_kind();
    num_classes_ = entries_[0].model.num_classes();
    for (const Entry& e : entries_) {
        require(e.model.input_dim() == dim_, "ModelBundle: models disagree on input dimension");
        require(e.model.output_kind() == kind_, "ModelBundle: models disagree on output kind");
        require(e.model.num_classes() == num_classes_, "ModelBundle: models disagree on class count");
        require(e.info.dim() == dim_, "ModelBundle: info dimension mismatch for model " + e.model.id());
    }
}

std::vector<DensityModel> fit_feature_densities(const ModelBundle& bundle) {
    std::vector<DensityModel> out;
    out.reserve(static_cast<size_t>(bundle.size()));
    for (int j = 0; j < bundle.size(); ++j) out.push_back(DensityModel::fit(bundle.info(j)));
    return out;
}

}  // namespace smc
