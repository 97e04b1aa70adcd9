// Minimal feed-forward networks: sequential dense layers, exact reverse-mode
// gradients through a cached-activation tape, and an Adam optimizer. All math
// in double precision so gradient checks hold at tight tolerances.

#ifndef SMC_NN_HPP
#define SMC_NN_HPP

#include "smc/common.hpp"
#include "smc/rng.hpp"

#include <string>
#include <vector>

namespace smc {

enum class Activation { Relu, Identity, Softmax };

struct Layer {
    Matrix weights;  // out_dim x in_dim
    Vector bias;     // out_dim
    Activation act = Activation::Identity;
};

class Mlp {
public:
    Mlp() = default;

    // Dense net with the given layer sizes; hidden layers use ReLU, the last
    // layer the given output activation. Weights He-uniform, biases zero.
    static Mlp make(const std::vector<int>& dims, Activation output_act, RngStream& rng);

    // Cached forward activations for one input; feeds backward().
    struct Tape {
        Vector input;
        std::vector<Vector> pre;   // pre-activation per layer
        std::vector<Vector> post;  // post-activation per layer
    };

    // Parameter gradients, shapes mirroring the layers.
    struct Grads {
        std::vector<Matrix> d_weights;
        std::vector<Vector> d_bias;

        void add(const Grads& other);
        void scale(double s);
    };

    Vector forward(const Eigen::Ref<const Vector>& x) const;
    Vector forward(const Eigen::Ref<const Vector>& x, Tape& tape) const;

    // Accumulates d(output . upstream)/d(params) into grads and returns the
    // gradient with respect to the input.
    Vector backward(const Tape& tape, const Eigen::Ref<const Vector>& upstream, Grads& grads) const;

    Grads zero_grads() const;

    int input_dim() const;
    int output_dim() const;
    int param_count() const;
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::string to_json() const;
    static Mlp from_json(const std::string& text);
    void save(const std::string& path) const;
    static Mlp load(const std::string& path);

private:
    explicit Mlp(std::vector<Layer> layers);
    void validate() const;

    std::vector<Layer> layers_;
};

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vector> m_bias, v_bias;
    long step = 0;

    static AdamState init(const Mlp& net);
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected Adam update of net's parameters in place.
void adam_step(Mlp& net, const Mlp::Grads& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace smc

#endif  // SMC_NN_HPP
