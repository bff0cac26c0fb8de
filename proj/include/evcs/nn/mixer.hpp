#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evcs/nn/layers.hpp"

namespace evcs::nn {

struct MixerSizes {
    std::size_t agents = 2;
    std::size_t state = 12;
    std::size_t embed = 32;
    std::size_t hyper_hidden = 64;

    bool operator==(const MixerSizes&) const = default;
};

/// State-conditioned monotone mixer
///   Q_tot = |w2(s)|^T elu(|W1(s)| q + b1(s)) + b2(s)
/// where W1 (embed x agents), b1, w2 and b2 are produced by hypernetworks.
/// Absolute values on the generated weights make dQ_tot/dq_i >= 0.
class MonotonicMixer {
public:
    struct Cache {
        DenseNet::Cache w1_net, b1_net, w2_net, b2_net;
        std::vector<double> w1_raw, b1, w2_raw;
        std::vector<double> qs;
        std::vector<double> hidden_pre;
        std::vector<double> hidden;
    };

    MonotonicMixer() = default;
    MonotonicMixer(const MixerSizes& sizes, const std::string& name);

    const MixerSizes& sizes() const { return sizes_; }

    double forward(std::span<const double> state, std::span<const double> agent_qs,
                   Cache* cache = nullptr) const;

    /// Accumulates hypernetwork gradients for dLoss/dQ_tot = grad_out and
    /// returns dLoss/dq.
    std::vector<double> backward(const Cache& cache, double grad_out);

    void init(std::mt19937_64& rng);
    ParamRefs parameters();
    ConstParamRefs parameters() const;

    DenseNet hyper_w1;
    DenseNet hyper_b1;
    DenseNet hyper_w2;
    DenseNet hyper_b2;

private:
    MixerSizes sizes_;
};

}  // namespace evcs::nn
