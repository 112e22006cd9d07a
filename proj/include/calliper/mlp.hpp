#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "calliper/matrix.hpp"
#include "calliper/rng.hpp"

namespace calliper {

template <class T>
struct DenseLayer {
    Mat<T> weight;        // in x out
    std::vector<T> bias;  // out
    bool residual = false;
};

// Plain fully connected stack: ReLU on every layer except the last, optional
// identity skip connections on square layers. Doubles as the gradient
// container for its own parameters.
template <class T>
struct Mlp {
    std::vector<DenseLayer<T>> layers;

    std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
    std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }

    void validate() const {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            if (layer.bias.size() != layer.weight.cols) {
                throw ShapeMismatchError("layer " + std::to_string(l) + ": bias size " +
                                         std::to_string(layer.bias.size()) + " vs weight cols " +
                                         std::to_string(layer.weight.cols));
            }
            if (layer.residual && layer.weight.rows != layer.weight.cols) {
                throw ShapeMismatchError("layer " + std::to_string(l) +
                                         ": residual layer must be square");
            }
            if (l + 1 < layers.size() && layer.weight.cols != layers[l + 1].weight.rows) {
                throw ShapeMismatchError("layer " + std::to_string(l) + " -> " +
                                         std::to_string(l + 1) + ": dimension chain broken");
            }
        }
    }

    Mlp<T> zeros_like() const {
        Mlp<T> g;
        g.layers.reserve(layers.size());
        for (const auto& layer : layers) {
            DenseLayer<T> z;
            z.weight = Mat<T>(layer.weight.rows, layer.weight.cols);
            z.bias.assign(layer.bias.size(), T(0));
            z.residual = layer.residual;
            g.layers.push_back(std::move(z));
        }
        return g;
    }
};

using MlpF = Mlp<float>;
using MlpD = Mlp<double>;

// Input linear, `residual_blocks` square skip layers, final linear. Weights
// are Kaiming-uniform (ReLU gain), biases zero.
template <class T>
Mlp<T> make_fcnet(std::size_t in, std::size_t hidden, std::size_t out,
                  std::size_t residual_blocks, Rng& rng) {
    auto init_layer = [&rng](std::size_t rows, std::size_t cols, bool residual) {
        DenseLayer<T> layer;
        layer.weight = Mat<T>(rows, cols);
        const double bound = std::sqrt(6.0 / static_cast<double>(rows));
        for (auto& w : layer.weight.data) w = static_cast<T>(rng.uniform(-bound, bound));
        layer.bias.assign(cols, T(0));
        layer.residual = residual;
        return layer;
    };
    Mlp<T> net;
    net.layers.push_back(init_layer(in, hidden, false));
    for (std::size_t i = 0; i < residual_blocks; ++i) {
        net.layers.push_back(init_layer(hidden, hidden, true));
    }
    net.layers.push_back(init_layer(hidden, out, false));
    return net;
}

// Activations cached by the forward pass; enough for an exact backward.
template <class T>
struct MlpTape {
    std::vector<Mat<T>> inputs;    // h_l, input to layer l
    std::vector<Mat<T>> pre_acts;  // z_l = h_l W_l + b_l
};

template <class T>
Mat<T> mlp_forward(const Mlp<T>& net, const Mat<T>& input, MlpTape<T>* tape = nullptr) {
    if (net.layers.empty()) throw ShapeMismatchError("mlp_forward: empty network");
    if (input.cols != net.in_dim()) {
        throw ShapeMismatchError("mlp_forward: input cols " + std::to_string(input.cols) +
                                 " vs in_dim " + std::to_string(net.in_dim()));
    }
    if (tape) {
        tape->inputs.clear();
        tape->pre_acts.clear();
    }
    Mat<T> h = input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const bool last = (l + 1 == net.layers.size());
        Mat<T> z = matmul(h, layer.weight);
        for (std::size_t i = 0; i < z.rows; ++i) {
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += layer.bias[j];
        }
        if (tape) {
            tape->inputs.push_back(h);
            tape->pre_acts.push_back(z);
        }
        Mat<T> out(z.rows, z.cols);
        if (last) {
            out.data = z.data;
        } else {
            for (std::size_t i = 0; i < z.data.size(); ++i) {
                out.data[i] = z.data[i] > T(0) ? z.data[i] : T(0);
            }
        }
        if (layer.residual) {
            for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += h.data[i];
        }
        ensure_finite(out, "mlp layer " + std::to_string(l));
        h = std::move(out);
    }
    return h;
}

// Reverse-mode gradients of mlp_forward. Parameter gradients are ACCUMULATED
// into `grads` (zero it first for fresh gradients); returns grad w.r.t. the
// input batch.
template <class T>
Mat<T> mlp_backward(const Mlp<T>& net, const MlpTape<T>& tape, const Mat<T>& grad_output,
                    Mlp<T>& grads) {
    if (tape.inputs.size() != net.layers.size()) {
        throw ShapeMismatchError("mlp_backward: tape does not match network depth");
    }
    if (grads.layers.size() != net.layers.size()) {
        throw ShapeMismatchError("mlp_backward: gradient container does not match network");
    }
    Mat<T> g = grad_output;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const auto& layer = net.layers[li];
        const bool last = (li + 1 == net.layers.size());
        const Mat<T>& h = tape.inputs[li];
        const Mat<T>& z = tape.pre_acts[li];
        if (g.rows != z.rows || g.cols != z.cols) {
            throw ShapeMismatchError("mlp_backward: gradient shape mismatch at layer " +
                                     std::to_string(li));
        }
        // dz = g * act'(z); identity on the final layer.
        Mat<T> dz = g;
        if (!last) {
            for (std::size_t i = 0; i < dz.data.size(); ++i) {
                if (z.data[i] <= T(0)) dz.data[i] = T(0);
            }
        }
        Mat<T> dw = matmul(h, dz, /*trans_a=*/true);
        auto& gl = grads.layers[li];
        for (std::size_t i = 0; i < dw.data.size(); ++i) gl.weight.data[i] += dw.data[i];
        for (std::size_t i = 0; i < dz.rows; ++i) {
            for (std::size_t j = 0; j < dz.cols; ++j) gl.bias[j] += dz(i, j);
        }
        Mat<T> dh = matmul(dz, layer.weight, false, /*trans_b=*/true);
        if (layer.residual) {
            for (std::size_t i = 0; i < dh.data.size(); ++i) dh.data[i] += g.data[i];
        }
        ensure_finite(dh, "mlp backward layer " + std::to_string(li));
        g = std::move(dh);
    }
    return g;
}

template <class To, class From>
Mlp<To> cast_mlp(const Mlp<From>& net) {
    Mlp<To> out;
    out.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers) {
        DenseLayer<To> l;
        l.weight = cast_matrix<From, To>(layer.weight);
        l.bias.reserve(layer.bias.size());
        for (From b : layer.bias) l.bias.push_back(static_cast<To>(b));
        l.residual = layer.residual;
        out.layers.push_back(std::move(l));
    }
    return out;
}

}  // namespace calliper
