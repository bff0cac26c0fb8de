#include "evcs/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "evcs/error.hpp"

namespace evcs::nn {

void Parameter::init_uniform(double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : value.data) v = dist(rng);
    zero_grad();
}

void zero_grads(const ParamRefs& params) {
    for (Parameter* p : params) p->zero_grad();
}

std::size_t parameter_count(const ConstParamRefs& params) {
    std::size_t n = 0;
    for (const Parameter* p : params) n += p->value.size();
    return n;
}

void copy_values(const ConstParamRefs& from, const ParamRefs& to) {
    if (from.size() != to.size()) throw ShapeError("copy_values: parameter lists differ in length");
    for (std::size_t k = 0; k < from.size(); ++k) {
        if (from[k]->value.rows != to[k]->value.rows || from[k]->value.cols != to[k]->value.cols)
            throw ShapeError("copy_values: shape mismatch at " + from[k]->name);
        to[k]->value = from[k]->value;
    }
}

void require_finite_grads(const ConstParamRefs& params) {
    for (const Parameter* p : params)
        for (std::size_t k = 0; k < p->grad.size(); ++k)
            if (!std::isfinite(p->grad.data[k]))
                throw DivergenceError("non-finite gradient in " + p->name + "[" + std::to_string(k) + "]");
}

ConstParamRefs as_const(const ParamRefs& params) { return {params.begin(), params.end()}; }

}  // namespace evcs::nn
