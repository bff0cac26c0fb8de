#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evcs/nn/layers.hpp"

namespace evcs::nn {

struct QNetSizes {
    std::size_t input = 6;
    std::size_t body = 64;
    std::size_t hidden = 64;
    std::size_t actions = 15;

    bool operator==(const QNetSizes&) const = default;
};

/// Recurrent Q-network: ReLU body, gated recurrent cell, linear Q head.
/// The head reads the updated hidden state, so q_t = head(h_{t+1}).
class RecurrentQNet {
public:
    struct StepCache {
        DenseCache body;
        GruCache gru;
        DenseCache head;
    };
    struct Output {
        std::vector<double> q;
        std::vector<double> hidden;
    };

    RecurrentQNet() = default;
    RecurrentQNet(const QNetSizes& sizes, const std::string& name);

    const QNetSizes& sizes() const { return sizes_; }
    std::vector<double> initial_hidden() const { return std::vector<double>(sizes_.hidden, 0.0); }

    Output forward(std::span<const double> obs, std::span<const double> hidden,
                   StepCache* cache = nullptr) const;

    /// Backpropagation through time over one unrolled sequence that started
    /// from a zero hidden state. grad_q[t] is dLoss/dq_t. Gradients accumulate.
    void backward_sequence(std::span<const StepCache> caches,
                           std::span<const std::vector<double>> grad_q);

    void init(std::mt19937_64& rng);
    ParamRefs parameters();
    ConstParamRefs parameters() const;

private:
    QNetSizes sizes_;
    Dense body_;
    GruCell gru_;
    Dense head_;
};

}  // namespace evcs::nn
