#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "evcs/nn/tensor.hpp"

namespace evcs::nn {

struct GradCheckReport {
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double tolerance = 1e-4;

    bool passed() const { return max_rel_error <= tolerance; }
};

/// Compares the gradients already stored in `params` against central
/// differences of `loss` with step h. Relative error per entry is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
/// Parameter values are restored exactly afterwards.
GradCheckReport grad_check(const ParamRefs& params, const std::function<double()>& loss,
                           double h = 1e-5, double tolerance = 1e-4);

}  // namespace evcs::nn
