#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ganatt/matrix.hpp"
#include "ganatt/rng.hpp"

namespace ganatt {

enum class HiddenActivation { Relu, Tanh };
enum class OutputActivation { Linear, Sigmoid };

// Pre-activations outside this range are clamped before exponentiation.
inline constexpr double kSigmoidClamp = 40.0;

inline double sigmoid(double z) {
    if (z > kSigmoidClamp) z = kSigmoidClamp;
    if (z < -kSigmoidClamp) z = -kSigmoidClamp;
    const double s = 1.0 / (1.0 + std::exp(-z));
    // Keep the output strictly inside (0,1); at +/-40 the quotient would
    // otherwise round to exactly 1.
    if (s >= 1.0) return 1.0 - 1e-15;
    if (s <= 0.0) return 1e-15;
    return s;
}

// Fully connected feedforward network. weights[l] maps layer l to layer l+1
// and has shape dims[l+1] x dims[l]; biases[l] is 1 x dims[l+1].
struct FeedforwardNet {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    HiddenActivation hidden_activation = HiddenActivation::Relu;
    OutputActivation output_activation = OutputActivation::Linear;

    FeedforwardNet() = default;
    FeedforwardNet(std::vector<std::size_t> dims, HiddenActivation hidden, OutputActivation output)
        : layer_dims(std::move(dims)), hidden_activation(hidden), output_activation(output) {
        if (layer_dims.size() < 2) throw ConfigError("network needs at least input and output layers");
        for (std::size_t d : layer_dims)
            if (d == 0) throw ConfigError("network layer width must be positive");
        for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
            weights.emplace_back(layer_dims[l + 1], layer_dims[l]);
            biases.emplace_back(1, layer_dims[l + 1]);
        }
    }

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t num_layers() const { return weights.size(); }

    // Uniform in +/- sqrt(6 / (fan_in + fan_out)); biases stay zero.
    void init_glorot(Rng& rng) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const double fan_in = static_cast<double>(layer_dims[l]);
            const double fan_out = static_cast<double>(layer_dims[l + 1]);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            Matrix& w = weights[l];
            for (std::size_t i = 0; i < w.rows(); ++i)
                for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
            biases[l].fill(0.0);
        }
    }

    std::vector<Matrix*> parameters() {
        std::vector<Matrix*> ps;
        for (auto& w : weights) ps.push_back(&w);
        for (auto& b : biases) ps.push_back(&b);
        return ps;
    }
};

// Activations cached during a forward pass, consumed by backward().
struct ForwardTrace {
    std::vector<Matrix> pre_activations;   // z_l for each layer
    std::vector<Matrix> activations;       // a_0 = input, a_l = act(z_l)

    const Matrix& output() const { return activations.back(); }
};

namespace detail {

inline void apply_hidden(Matrix& m, HiddenActivation act) {
    double* p = m.data();
    const std::size_t n = m.size();
    if (act == HiddenActivation::Relu) {
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] < 0.0) p[i] = 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
    }
}

inline void apply_output(Matrix& m, OutputActivation act) {
    if (act == OutputActivation::Linear) return;
    double* p = m.data();
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(p[i]);
}

}  // namespace detail

inline ForwardTrace forward_trace(const FeedforwardNet& net, const Matrix& batch) {
    if (batch.cols() != net.input_dim())
        throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    ForwardTrace trace;
    trace.activations.reserve(net.num_layers() + 1);
    trace.pre_activations.reserve(net.num_layers());
    trace.activations.push_back(batch);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix z = matmul_nt(trace.activations.back(), net.weights[l]);
        add_row_inplace(z, net.biases[l]);
        trace.pre_activations.push_back(z);
        Matrix a = std::move(z);
        if (l + 1 < net.num_layers())
            detail::apply_hidden(a, net.hidden_activation);
        else
            detail::apply_output(a, net.output_activation);
        trace.activations.push_back(std::move(a));
    }
    return trace;
}

inline Matrix forward(const FeedforwardNet& net, const Matrix& batch) {
    return forward_trace(net, batch).output();
}

struct NetGradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    Matrix input;  // d loss / d batch

    std::vector<const Matrix*> parameters() const {
        std::vector<const Matrix*> ps;
        for (auto& w : weights) ps.push_back(&w);
        for (auto& b : biases) ps.push_back(&b);
        return ps;
    }
};

// Backpropagates upstream_grad (shaped like the forward output) through the
// trace, returning parameter gradients and the gradient w.r.t. the input.
inline NetGradients backward(const FeedforwardNet& net, const ForwardTrace& trace,
                             const Matrix& upstream_grad) {
    const std::size_t layers = net.num_layers();
    if (trace.activations.size() != layers + 1)
        throw ShapeError("backward: trace does not match network");
    if (!upstream_grad.same_shape(trace.activations.back()))
        throw ShapeError("backward: upstream gradient shape mismatch");

    NetGradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    Matrix delta = upstream_grad;
    for (std::size_t li = layers; li-- > 0;) {
        const Matrix& z = trace.pre_activations[li];
        if (li + 1 == layers) {
            if (net.output_activation == OutputActivation::Sigmoid) {
                const Matrix& a = trace.activations.back();
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    const double s = a.data()[i];
                    delta.data()[i] *= s * (1.0 - s);
                }
            }
        } else {
            if (net.hidden_activation == HiddenActivation::Relu) {
                for (std::size_t i = 0; i < delta.size(); ++i)
                    if (z.data()[i] <= 0.0) delta.data()[i] = 0.0;
            } else {
                const Matrix& a = trace.activations[li + 1];
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    const double t = a.data()[i];
                    delta.data()[i] *= 1.0 - t * t;
                }
            }
        }
        grads.weights[li] = matmul_tn(delta, trace.activations[li]);
        grads.biases[li] = column_sums(delta);
        if (li > 0)
            delta = matmul(delta, net.weights[li]);
        else
            grads.input = matmul(delta, net.weights[0]);
    }
    return grads;
}

inline NetGradients backward(const FeedforwardNet& net, const Matrix& batch,
                             const Matrix& upstream_grad) {
    return backward(net, forward_trace(net, batch), upstream_grad);
}

}  // namespace ganatt
