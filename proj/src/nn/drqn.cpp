#include "evcs/nn/drqn.hpp"

#include "evcs/error.hpp"

namespace evcs::nn {

RecurrentQNet::RecurrentQNet(const QNetSizes& sizes, const std::string& name)
    : sizes_(sizes),
      body_(sizes.input, sizes.body, Activation::relu, name + ".body"),
      gru_(sizes.body, sizes.hidden, name + ".gru"),
      head_(sizes.hidden, sizes.actions, Activation::none, name + ".head") {}

RecurrentQNet::Output RecurrentQNet::forward(std::span<const double> obs, std::span<const double> hidden,
                                             StepCache* cache) const {
    Output out;
    const auto x = body_.forward(obs, cache ? &cache->body : nullptr);
    out.hidden = gru_.step(x, hidden, cache ? &cache->gru : nullptr);
    out.q = head_.forward(out.hidden, cache ? &cache->head : nullptr);
    return out;
}

void RecurrentQNet::backward_sequence(std::span<const StepCache> caches,
                                      std::span<const std::vector<double>> grad_q) {
    if (caches.size() != grad_q.size()) throw ShapeError("backward_sequence: caches and grads differ");
    std::vector<double> carry(sizes_.hidden, 0.0);
    std::vector<double> dx, dh_prev;
    for (std::size_t t = caches.size(); t-- > 0;) {
        auto dh = head_.backward(caches[t].head, grad_q[t]);
        for (std::size_t k = 0; k < dh.size(); ++k) dh[k] += carry[k];
        gru_.backward(caches[t].gru, dh, dx, dh_prev);
        body_.backward(caches[t].body, dx);
        carry.swap(dh_prev);
    }
}

void RecurrentQNet::init(std::mt19937_64& rng) {
    body_.init(rng);
    gru_.init(rng);
    head_.init(rng);
}

ParamRefs RecurrentQNet::parameters() {
    ParamRefs out = body_.parameters();
    for (Parameter* p : gru_.parameters()) out.push_back(p);
    for (Parameter* p : head_.parameters()) out.push_back(p);
    return out;
}

ConstParamRefs RecurrentQNet::parameters() const {
    ConstParamRefs out = body_.parameters();
    for (const Parameter* p : gru_.parameters()) out.push_back(p);
    for (const Parameter* p : head_.parameters()) out.push_back(p);
    return out;
}

}  // namespace evcs::nn
