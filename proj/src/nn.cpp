#include "smc/nn.hpp"

#include <json.hpp>

#include <fstream>

namespace smc {
namespace {

Vector apply_activation(Activation act, const Vector& pre) {
    switch (act) {
        case Activation::Relu:
            return pre.cwiseMax(0.0);
        case Activation::Identity:
            return pre;
        case Activation::Softmax: {
            // shift by max for stability
            Vector shifted = pre.array() - pre.maxCoeff();
            Vector e = shifted.array().exp();
            return e / e.sum();
        }
    }
    throw std::logic_error("unknown activation");
}

// d(post . upstream)/d(pre)
Vector activation_backward(Activation act, const Vector& pre, const Vector& post, const Vector& upstream) {
    switch (act) {
        case Activation::Relu: {
            Vector out = upstream;
            for (Eigen::Index i = 0; i < pre.size(); ++i)
                if (pre(i) <= 0.0) out(i) = 0.0;
            return out;
        }
        case Activation::Identity:
            return upstream;
        case Activation::Softmax: {
            // J^T u = y .* (u - y.u)
            double dot = post.dot(upstream);
            return post.array() * (upstream.array() - dot);
        }
    }
    throw std::logic_error("unknown activation");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
        case Activation::Softmax: return "softmax";
    }
    throw std::logic_error("unknown activation");
}

Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    if (s == "softmax") return Activation::Softmax;
    throw std::invalid_argument("unknown activation name: " + s);
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

void Mlp::validate() const {
    require(!layers_.empty(), "Mlp: needs at least one layer");
    for (size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        require(l.weights.rows() == l.bias.size(), "Mlp: bias size mismatch");
        require(l.weights.allFinite() && l.bias.allFinite(), "Mlp: non-finite parameter");
        if (i > 0)
            require(l.weights.cols() == layers_[i - 1].weights.rows(),
                    "Mlp: layer dims do not chain");
        if (l.act == Activation::Softmax)
            require(i + 1 == layers_.size(), "Mlp: softmax only allowed on the final layer");
    }
}

Mlp Mlp::make(const std::vector<int>& dims, Activation output_act, RngStream& rng) {
    require(dims.size() >= 2, "Mlp::make: need input and output dims");
    std::vector<Layer> layers;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        int fan_in = dims[i], fan_out = dims[i + 1];
        require(fan_in >= 1 && fan_out >= 1, "Mlp::make: dims must be positive");
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        l.weights.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
                l.weights(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
        l.bias = Vector::Zero(fan_out);
        l.act = (i + 2 < dims.size()) ? Activation::Relu : output_act;
        layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
}

int Mlp::input_dim() const { return static_cast<int>(layers_.front().weights.cols()); }
int Mlp::output_dim() const { return static_cast<int>(layers_.back().weights.rows()); }

int Mlp::param_count() const {
    int n = 0;
    for (const Layer& l : layers_) n += static_cast<int>(l.weights.size() + l.bias.size());
    return n;
}

Vector Mlp::forward(const Eigen::Ref<const Vector>& x) const {
    require(x.size() == input_dim(), "Mlp::forward: input dim mismatch");
    Vector h = x;
    for (const Layer& l : layers_) h = apply_activation(l.act, l.weights * h + l.bias);
    return h;
}

Vector Mlp::forward(const Eigen::Ref<const Vector>& x, Tape& tape) const {
    require(x.size() == input_dim(), "Mlp::forward: input dim mismatch");
    tape.input = x;
    tape.pre.resize(layers_.size());
    tape.post.resize(layers_.size());
    Vector h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
        tape.pre[i] = layers_[i].weights * h + layers_[i].bias;
        tape.post[i] = apply_activation(layers_[i].act, tape.pre[i]);
        h = tape.post[i];
    }
    return h;
}

Mlp::Grads Mlp::zero_grads() const {
    Grads g;
    g.d_weights.reserve(layers_.size());
    g.d_bias.reserve(layers_.size());
    for (const Layer& l : layers_) {
        g.d_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        g.d_bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
}

void Mlp::Grads::add(const Grads& other) {
    require(d_weights.size() == other.d_weights.size(), "Grads::add: layer count mismatch");
    for (size_t i = 0; i < d_weights.size(); ++i) {
        d_weights[i] += other.d_weights[i];
        d_bias[i] += other.d_bias[i];
    }
}

void Mlp::Grads::scale(double s) {
    for (size_t i = 0; i < d_weights.size(); ++i) {
        d_weights[i] *= s;
        d_bias[i] *= s;
    }
}

Vector Mlp::backward(const Tape& tape, const Eigen::Ref<const Vector>& upstream, Grads& grads) const {
    require(tape.pre.size() == layers_.size(), "Mlp::backward: tape/net mismatch");
    require(upstream.size() == output_dim(), "Mlp::backward: upstream dim mismatch");
    require(grads.d_weights.size() == layers_.size(), "Mlp::backward: grads/net mismatch");

    Vector delta = upstream;
    for (size_t i = layers_.size(); i-- > 0;) {
        delta = activation_backward(layers_[i].act, tape.pre[i], tape.post[i], delta);
        const Vector& in = (i == 0) ? tape.input : tape.post[i - 1];
        grads.d_weights[i].noalias() += delta * in.transpose();
        grads.d_bias[i] += delta;
        delta = layers_[i].weights.transpose() * delta;
    }
    return delta;
}

AdamState AdamState::init(const Mlp& net) {
    AdamState s;
    for (const Layer& l : net.layers()) {
        s.m_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        s.v_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        s.m_bias.push_back(Vector::Zero(l.bias.size()));
        s.v_bias.push_back(Vector::Zero(l.bias.size()));
    }
    return s;
}

namespace {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, long t, const AdamConfig& cfg) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * grad.array().square().matrix();
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    param.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace

void adam_step(Mlp& net, const Mlp::Grads& grads, AdamState& state, const AdamConfig& cfg) {
    require(grads.d_weights.size() == net.layers().size(), "adam_step: shape mismatch");
    state.step += 1;
    for (size_t i = 0; i < net.layers().size(); ++i) {
        adam_update(net.layers()[i].weights, grads.d_weights[i], state.m_weights[i], state.v_weights[i],
                    state.step, cfg);
        adam_update(net.layers()[i].bias, grads.d_bias[i], state.m_bias[i], state.v_bias[i], state.step, cfg);
    }
}

std::string Mlp::to_json() const {
    nlohmann::json j;
    j["layers"] = nlohmann::json::array();
    for (const Layer& l : layers_) {
        nlohmann::json jl;
        jl["in"] = l.weights.cols();
        jl["out"] = l.weights.rows();
        jl["activation"] = activation_name(l.act);
        std::vector<double> w(static_cast<size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
                w[static_cast<size_t>(r * l.weights.cols() + c)] = l.weights(r, c);
        jl["weights"] = w;
        jl["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
        j["layers"].push_back(std::move(jl));
    }
    return j.dump(2);
}

Mlp Mlp::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
        Layer l;
        Eigen::Index in = jl.at("in").get<Eigen::Index>();
        Eigen::Index out = jl.at("out").get<Eigen::Index>();
        l.act = activation_from_name(jl.at("activation").get<std::string>());
        auto w = jl.at("weights").get<std::vector<double>>();
        auto b = jl.at("bias").get<std::vector<double>>();
        require(static_cast<Eigen::Index>(w.size()) == in * out, "Mlp::from_json: weight count mismatch");
        require(static_cast<Eigen::Index>(b.size()) == out, "Mlp::from_json: bias count mismatch");
        l.weights.resize(out, in);
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) l.weights(r, c) = w[static_cast<size_t>(r * in + c)];
        l.bias = Eigen::Map<Vector>(b.data(), out);
        layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
}

void Mlp::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write checkpoint: " + path);
    out << to_json() << '\n';
}

Mlp Mlp::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace smc
