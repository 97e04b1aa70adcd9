#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "smc/expert.hpp"

#include <cmath>
#include <vector>

using smc::DensityModel;
using smc::ExpertModel;
using smc::Matrix;
using smc::ModelBundle;
using smc::ModelInfo;
using smc::OutputKind;
using smc::Prediction;
using smc::RngStream;
using smc::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

ExpertModel constant_classifier(const std::string& id, Vector probs, int d) {
    const int k = static_cast<int>(probs.size());
    return ExpertModel(
        id, OutputKind::Classification, d, k,
        [probs](const Vector&) { return Prediction::classification(probs); }, 1);
}

ModelInfo unit_info(double center) {
    Matrix m(3, 1);
    m << center - 0.5, center, center + 0.5;
    return ModelInfo::from_samples(m);
}

}  // namespace

TEST_CASE("regression prediction exposes its scalar") {
    Prediction p = Prediction::regression(2.5);
    CHECK(p.kind() == OutputKind::Regression);
    CHECK(p.scalar() == 2.5);
    CHECK(p.value().size() == 1);
    CHECK(p.value()(0) == 2.5);
    CHECK_THROWS_AS(p.probs(), std::invalid_argument);
}

TEST_CASE("classification prediction must live on the simplex") {
    CHECK_NOTHROW(Prediction::classification(vec({0.25, 0.75})));
    CHECK_THROWS_AS(Prediction::classification(vec({0.5, 0.6})), std::invalid_argument);
    CHECK_THROWS_AS(Prediction::classification(vec({-0.1, 1.1})), std::invalid_argument);
    Prediction p = Prediction::classification(vec({0.3, 0.7}));
    CHECK_THROWS_AS(p.scalar(), std::invalid_argument);
    CHECK(p.probs()(1) == 0.7);
}

TEST_CASE("mlp regressor wrapper forwards through the net") {
    RngStream rng(1);
    smc::Mlp net = smc::Mlp::make({2, 6, 1}, smc::Activation::Identity, rng);
    ExpertModel m = ExpertModel::from_mlp_regressor("reg", net);
    CHECK(m.output_kind() == OutputKind::Regression);
    CHECK(m.input_dim() == 2);
    CHECK(m.param_count() == net.param_count());
    const Vector x = vec({0.4, -1.0});
    CHECK(m.predict(x).scalar() == net.forward(x)(0));
}

TEST_CASE("mlp classifier wrapper yields the softmax distribution") {
    RngStream rng(2);
    smc::Mlp net = smc::Mlp::make({3, 8, 4}, smc::Activation::Softmax, rng);
    ExpertModel m = ExpertModel::from_mlp_classifier("cls", net);
    CHECK(m.output_kind() == OutputKind::Classification);
    CHECK(m.num_classes() == 4);
    const Vector x = vec({1.0, 0.0, -1.0});
    const Vector probs = m.predict(x).probs();
    CHECK((probs - net.forward(x)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("predict validates the input dimension") {
    RngStream rng(3);
    smc::Mlp net = smc::Mlp::make({2, 4, 1}, smc::Activation::Identity, rng);
    ExpertModel m = ExpertModel::from_mlp_regressor("reg", net);
    CHECK_THROWS_AS(m.predict(vec({1.0})), std::invalid_argument);
}

TEST_CASE("predict_batch stacks one row per instance") {
    ExpertModel c = constant_classifier("c", vec({0.2, 0.3, 0.5}), 2);
    Matrix x(4, 2);
    x.setZero();
    const Matrix out = c.predict_batch(x);
    CHECK(out.rows() == 4);
    CHECK(out.cols() == 3);
    CHECK(out(3, 2) == 0.5);

    RngStream rng(4);
    smc::Mlp net = smc::Mlp::make({2, 4, 1}, smc::Activation::Identity, rng);
    ExpertModel r = ExpertModel::from_mlp_regressor("r", net);
    const Matrix rout = r.predict_batch(x);
    CHECK(rout.cols() == 1);
    CHECK(rout(0, 0) == r.predict(x.row(0).transpose()).scalar());
}

TEST_CASE("bundle enforces shared dimension and output kind") {
    std::vector<ModelBundle::Entry> ok;
    ok.push_back({constant_classifier("a", vec({0.5, 0.5}), 2), unit_info(0.0)});
    ok.push_back({constant_classifier("b", vec({0.9, 0.1}), 2), unit_info(1.0)});
    // info dim 1 but model dim 2 -> mismatch
    CHECK_THROWS_AS(ModelBundle(std::move(ok)), std::invalid_argument);

    auto reg = [](const std::string& id) {
        return ExpertModel(
            id, OutputKind::Regression, 1, 0,
            [](const Vector& x) { return Prediction::regression(x(0)); }, 1);
    };
    std::vector<ModelBundle::Entry> mixed;
    mixed.push_back({reg("r"), unit_info(0.0)});
    mixed.push_back({constant_classifier("c", vec({1.0, 0.0}), 1), unit_info(1.0)});
    CHECK_THROWS_AS(ModelBundle(std::move(mixed)), std::invalid_argument);

    std::vector<ModelBundle::Entry> good;
    good.push_back({reg("r0"), unit_info(0.0)});
    good.push_back({reg("r1"), unit_info(5.0)});
    ModelBundle bundle(std::move(good));
    CHECK(bundle.size() == 2);
    CHECK(bundle.dim() == 1);
    CHECK(bundle.output_kind() == OutputKind::Regression);
    CHECK(bundle.model(1).id() == "r1");
}

TEST_CASE("a one-model bundle is allowed") {
    std::vector<ModelBundle::Entry> one;
    one.push_back({ExpertModel(
                       "solo", OutputKind::Regression, 1, 0,
                       [](const Vector& x) { return Prediction::regression(2 * x(0)); }, 1),
                   unit_info(0.0)});
    ModelBundle bundle(std::move(one));
    CHECK(bundle.size() == 1);
}

TEST_CASE("classifier wrapper rejects non-simplex outputs at predict time") {
    ExpertModel bad(
        "bad", OutputKind::Classification, 1, 2,
        [](const Vector&) {
            Vector v(2);
            v << 0.8, 0.8;
            return Prediction::regression(0.0);  // wrong kind
        },
        1);
    CHECK_THROWS_AS(bad.predict(vec({0.0})), std::invalid_argument);
}

TEST_CASE("feature densities follow the info variant") {
    auto reg = [](const std::string& id) {
        return ExpertModel(
            id, OutputKind::Regression, 1, 0,
            [](const Vector& x) { return Prediction::regression(x(0)); }, 1);
    };
    std::vector<smc::MomentDim> dims(1);
    dims[0] = {smc::DimKind::Continuous, 3.0, 1.0, 0.5};
    std::vector<ModelBundle::Entry> entries;
    entries.push_back({reg("samples"), unit_info(0.0)});
    entries.push_back({reg("moments"), ModelInfo::from_moments(dims)});
    ModelBundle bundle(std::move(entries));
    const std::vector<DensityModel> densities = smc::fit_feature_densities(bundle);
    REQUIRE(densities.size() == 2);
    CHECK(densities[0].kind() == DensityModel::Kind::Kde);
    CHECK(densities[1].kind() == DensityModel::Kind::Factorised);
    // KDE support is exactly the info samples
    CHECK((densities[0].support() - bundle.info(0).samples()).cwiseAbs().maxCoeff() == 0.0);
}
