#include "evcs/nn/mixer.hpp"

#include <cmath>

#include "evcs/error.hpp"

namespace evcs::nn {

namespace {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

MonotonicMixer::MonotonicMixer(const MixerSizes& s, const std::string& name)
    : hyper_w1({s.state, s.hyper_hidden, s.agents * s.embed}, name + ".hyper_w1"),
      hyper_b1({s.state, s.embed}, name + ".hyper_b1"),
      hyper_w2({s.state, s.hyper_hidden, s.embed}, name + ".hyper_w2"),
      hyper_b2({s.state, s.hyper_hidden, 1}, name + ".hyper_b2"),
      sizes_(s) {}

double MonotonicMixer::forward(std::span<const double> state, std::span<const double> agent_qs,
                               Cache* cache) const {
    const std::size_t A = sizes_.agents, E = sizes_.embed;
    if (agent_qs.size() != A)
        throw ShapeError("mixer: expected " + std::to_string(A) + " agent values, got " +
                         std::to_string(agent_qs.size()));
    if (state.size() != sizes_.state)
        throw ShapeError("mixer: expected state length " + std::to_string(sizes_.state) + ", got " +
                         std::to_string(state.size()));

    auto w1 = hyper_w1.forward(state, cache ? &cache->w1_net : nullptr);
    auto b1 = hyper_b1.forward(state, cache ? &cache->b1_net : nullptr);
    auto w2 = hyper_w2.forward(state, cache ? &cache->w2_net : nullptr);
    const double b2 = hyper_b2.forward(state, cache ? &cache->b2_net : nullptr)[0];

    std::vector<double> pre(E), hidden(E);
    double q_tot = b2;
    for (std::size_t e = 0; e < E; ++e) {
        double acc = b1[e];
        for (std::size_t j = 0; j < A; ++j) acc += std::abs(w1[e * A + j]) * agent_qs[j];
        pre[e] = acc;
        hidden[e] = elu(acc);
        q_tot += std::abs(w2[e]) * hidden[e];
    }
    if (cache) {
        cache->w1_raw = std::move(w1);
        cache->b1 = std::move(b1);
        cache->w2_raw = std::move(w2);
        cache->qs.assign(agent_qs.begin(), agent_qs.end());
        cache->hidden_pre = std::move(pre);
        cache->hidden = std::move(hidden);
    }
    return q_tot;
}

std::vector<double> MonotonicMixer::backward(const Cache& c, double grad_out) {
    const std::size_t A = sizes_.agents, E = sizes_.embed;
    std::vector<double> d_w1(A * E), d_b1(E), d_w2(E), d_q(A, 0.0);
    for (std::size_t e = 0; e < E; ++e) {
        d_w2[e] = grad_out * c.hidden[e] * sign(c.w2_raw[e]);
        const double d_pre = grad_out * std::abs(c.w2_raw[e]) * elu_grad(c.hidden_pre[e]);
        d_b1[e] = d_pre;
        for (std::size_t j = 0; j < A; ++j) {
            const double w = c.w1_raw[e * A + j];
            d_w1[e * A + j] = d_pre * c.qs[j] * sign(w);
            d_q[j] += d_pre * std::abs(w);
        }
    }
    const double d_b2[1] = {grad_out};
    hyper_w1.backward(c.w1_net, d_w1);
    hyper_b1.backward(c.b1_net, d_b1);
    hyper_w2.backward(c.w2_net, d_w2);
    hyper_b2.backward(c.b2_net, d_b2);
    return d_q;
}

void MonotonicMixer::init(std::mt19937_64& rng) {
    hyper_w1.init(rng);
    hyper_b1.init(rng);
    hyper_w2.init(rng);
    hyper_b2.init(rng);
}

ParamRefs MonotonicMixer::parameters() {
    ParamRefs out;
    for (DenseNet* net : {&hyper_w1, &hyper_b1, &hyper_w2, &hyper_b2})
        for (Parameter* p : net->parameters()) out.push_back(p);
    return out;
}

ConstParamRefs MonotonicMixer::parameters() const {
    ConstParamRefs out;
    for (const DenseNet* net : {&hyper_w1, &hyper_b1, &hyper_w2, &hyper_b2})
        for (const Parameter* p : net->parameters()) out.push_back(p);
    return out;
}

}  // namespace evcs::nn
