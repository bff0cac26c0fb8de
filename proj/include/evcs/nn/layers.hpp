#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evcs/nn/tensor.hpp"

namespace evcs::nn {

enum class Activation { relu, none };

struct DenseCache {
    std::vector<double> input;
    std::vector<double> pre;
};

/// Affine map followed by an optional ReLU.
class Dense {
public:
    Dense() = default;
    Dense(std::size_t in, std::size_t out, Activation act, const std::string& name);

    std::size_t in_size() const { return weight.value.cols; }
    std::size_t out_size() const { return weight.value.rows; }

    std::vector<double> forward(std::span<const double> x, DenseCache* cache = nullptr) const;
    /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
    std::vector<double> backward(const DenseCache& cache, std::span<const double> grad_out);

    void init(std::mt19937_64& rng);
    ParamRefs parameters() { return {&weight, &bias}; }
    ConstParamRefs parameters() const { return {&weight, &bias}; }

    Parameter weight;
    Parameter bias;
    Activation activation = Activation::none;
};

class DenseNet {
public:
    struct Cache {
        std::vector<DenseCache> layers;
    };

    DenseNet() = default;
    /// widths = {in, h1, ..., out}; hidden layers use ReLU, the last layer `last`.
    DenseNet(const std::vector<std::size_t>& widths, const std::string& name,
             Activation last = Activation::none);

    std::size_t in_size() const { return layers.front().in_size(); }
    std::size_t out_size() const { return layers.back().out_size(); }

    std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const;
    std::vector<double> backward(const Cache& cache, std::span<const double> grad_out);

    void init(std::mt19937_64& rng);
    ParamRefs parameters();
    ConstParamRefs parameters() const;

    std::vector<Dense> layers;
};

struct GruCache {
    std::vector<double> input;
    std::vector<double> hidden_prev;
    std::vector<double> reset;
    std::vector<double> update;
    std::vector<double> candidate;
    std::vector<double> hidden_candidate_pre;  // W_hn h + b_hn
};

/// Gated recurrent cell, gate blocks ordered (reset, update, candidate):
///   r = sigmoid(Wx_r x + bx_r + Wh_r h + bh_r)
///   z = sigmoid(Wx_z x + bx_z + Wh_z h + bh_z)
///   n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
///   h' = (1 - z) * n + z * h
class GruCell {
public:
    GruCell() = default;
    GruCell(std::size_t input, std::size_t hidden, const std::string& name);

    std::size_t input_size() const { return w_input.value.cols; }
    std::size_t hidden_size() const { return w_hidden.value.cols; }

    std::vector<double> step(std::span<const double> x, std::span<const double> h,
                             GruCache* cache = nullptr) const;
    /// Accumulates parameter gradients; writes input and previous-hidden gradients.
    void backward(const GruCache& cache, std::span<const double> grad_hidden,
                  std::vector<double>& grad_input, std::vector<double>& grad_hidden_prev);

    void init(std::mt19937_64& rng);
    ParamRefs parameters() { return {&w_input, &w_hidden, &b_input, &b_hidden}; }
    ConstParamRefs parameters() const { return {&w_input, &w_hidden, &b_input, &b_hidden}; }

    Parameter w_input;
    Parameter w_hidden;
    Parameter b_input;
    Parameter b_hidden;
};

}  // namespace evcs::nn
