#pragma once

#include <cstddef>
#include <vector>

#include "evcs/nn/tensor.hpp"

namespace evcs::nn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adaptive-moment optimizer. Moment buffers are matched to the parameter
/// list by position, so every call must pass the same list in the same order.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// One update from the gradients currently stored in `params`.
    /// Throws DivergenceError on a non-finite gradient, ShapeError on a list mismatch.
    void step(const ParamRefs& params, double lr);

    std::size_t step_count() const { return steps_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::size_t steps_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace evcs::nn
