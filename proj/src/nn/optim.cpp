#include "evcs/nn/optim.hpp"

#include <cmath>

#include "evcs/error.hpp"
#include "evcs/nn/kernels.hpp"

namespace evcs::nn {

void Adam::step(const ParamRefs& params, double lr) {
    require_finite_grads(as_const(params));
    if (m_.empty()) {
        for (const Parameter* p : params) {
            m_.emplace_back(p->value.size(), 0.0);
            v_.emplace_back(p->value.size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw ShapeError("Adam: parameter list changed between steps");
    ++steps_;
    kernels::AdamCoeffs c;
    c.lr = lr;
    c.beta1 = cfg_.beta1;
    c.beta2 = cfg_.beta2;
    c.eps = cfg_.eps;
    c.bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    c.bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    const auto& K = kernels::active();
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (m_[k].size() != p.value.size()) throw ShapeError("Adam: shape changed for " + p.name);
        K.adam(p.value.data.data(), p.grad.data.data(), m_[k].data(), v_[k].data(), p.value.size(), c);
    }
}

}  // namespace evcs::nn
