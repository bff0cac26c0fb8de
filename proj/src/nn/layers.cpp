#include "evcs/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "evcs/error.hpp"
#include "evcs/nn/kernels.hpp"

namespace evcs::nn {

namespace {

void require_size(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Dense::Dense(std::size_t in, std::size_t out, Activation act, const std::string& name)
    : weight(name + ".weight", out, in), bias(name + ".bias", out, 1), activation(act) {}

std::vector<double> Dense::forward(std::span<const double> x, DenseCache* cache) const {
    require_size(x, in_size(), weight.name.c_str());
    std::vector<double> y(out_size());
    kernels::active().gemv(weight.value.data.data(), out_size(), in_size(), x.data(),
                           bias.value.data.data(), y.data());
    if (cache) {
        cache->input.assign(x.begin(), x.end());
        cache->pre = y;
    }
    if (activation == Activation::relu)
        for (double& v : y) v = v > 0.0 ? v : 0.0;
    return y;
}

std::vector<double> Dense::backward(const DenseCache& cache, std::span<const double> grad_out) {
    require_size(grad_out, out_size(), weight.name.c_str());
    std::vector<double> g(grad_out.begin(), grad_out.end());
    if (activation == Activation::relu)
        for (std::size_t k = 0; k < g.size(); ++k)
            if (!(cache.pre[k] > 0.0)) g[k] = 0.0;
    const auto& K = kernels::active();
    K.outer_acc(weight.grad.data.data(), out_size(), in_size(), g.data(), cache.input.data());
    for (std::size_t k = 0; k < g.size(); ++k) bias.grad.data[k] += g[k];
    std::vector<double> dx(in_size(), 0.0);
    K.gemv_t_acc(weight.value.data.data(), out_size(), in_size(), g.data(), dx.data());
    return dx;
}

void Dense::init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(in_size(), 1)));
    weight.init_uniform(bound, rng);
    bias.init_uniform(bound, rng);
}

DenseNet::DenseNet(const std::vector<std::size_t>& widths, const std::string& name, Activation last) {
    if (widths.size() < 2) throw ShapeError("DenseNet needs at least input and output widths");
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const bool final_layer = k + 2 == widths.size();
        layers.emplace_back(widths[k], widths[k + 1], final_layer ? last : Activation::relu,
                            name + ".l" + std::to_string(k));
    }
}

std::vector<double> DenseNet::forward(std::span<const double> x, Cache* cache) const {
    if (cache) cache->layers.resize(layers.size());
    std::vector<double> h(x.begin(), x.end());
    for (std::size_t k = 0; k < layers.size(); ++k)
        h = layers[k].forward(h, cache ? &cache->layers[k] : nullptr);
    return h;
}

std::vector<double> DenseNet::backward(const Cache& cache, std::span<const double> grad_out) {
    std::vector<double> g(grad_out.begin(), grad_out.end());
    for (std::size_t k = layers.size(); k-- > 0;) g = layers[k].backward(cache.layers[k], g);
    return g;
}

void DenseNet::init(std::mt19937_64& rng) {
    for (auto& l : layers) l.init(rng);
}

ParamRefs DenseNet::parameters() {
    ParamRefs out;
    for (auto& l : layers)
        for (Parameter* p : l.parameters()) out.push_back(p);
    return out;
}

ConstParamRefs DenseNet::parameters() const {
    ConstParamRefs out;
    for (const auto& l : layers)
        for (const Parameter* p : l.parameters()) out.push_back(p);
    return out;
}

GruCell::GruCell(std::size_t input, std::size_t hidden, const std::string& name)
    : w_input(name + ".w_input", 3 * hidden, input),
      w_hidden(name + ".w_hidden", 3 * hidden, hidden),
      b_input(name + ".b_input", 3 * hidden, 1),
      b_hidden(name + ".b_hidden", 3 * hidden, 1) {}

std::vector<double> GruCell::step(std::span<const double> x, std::span<const double> h,
                                  GruCache* cache) const {
    const std::size_t H = hidden_size();
    require_size(x, input_size(), w_input.name.c_str());
    require_size(h, H, w_hidden.name.c_str());
    const auto& K = kernels::active();
    std::vector<double> gx(3 * H), gh(3 * H);
    K.gemv(w_input.value.data.data(), 3 * H, input_size(), x.data(), b_input.value.data.data(), gx.data());
    K.gemv(w_hidden.value.data.data(), 3 * H, H, h.data(), b_hidden.value.data.data(), gh.data());

    std::vector<double> r(H), z(H), n(H), out(H);
    for (std::size_t k = 0; k < H; ++k) {
        r[k] = sigmoid(gx[k] + gh[k]);
        z[k] = sigmoid(gx[H + k] + gh[H + k]);
        n[k] = std::tanh(gx[2 * H + k] + r[k] * gh[2 * H + k]);
        out[k] = (1.0 - z[k]) * n[k] + z[k] * h[k];
    }
    if (cache) {
        cache->input.assign(x.begin(), x.end());
        cache->hidden_prev.assign(h.begin(), h.end());
        cache->reset = std::move(r);
        cache->update = std::move(z);
        cache->candidate = std::move(n);
        cache->hidden_candidate_pre.assign(gh.begin() + static_cast<std::ptrdiff_t>(2 * H), gh.end());
    }
    return out;
}

void GruCell::backward(const GruCache& c, std::span<const double> grad_hidden,
                       std::vector<double>& grad_input, std::vector<double>& grad_hidden_prev) {
    const std::size_t H = hidden_size();
    const std::size_t I = input_size();
    require_size(grad_hidden, H, w_hidden.name.c_str());

    std::vector<double> dgx(3 * H), dgh(3 * H);
    grad_hidden_prev.assign(H, 0.0);
    for (std::size_t k = 0; k < H; ++k) {
        const double dh = grad_hidden[k];
        const double r = c.reset[k], z = c.update[k], n = c.candidate[k];
        const double dn = dh * (1.0 - z);
        const double dz = dh * (c.hidden_prev[k] - n);
        grad_hidden_prev[k] = dh * z;
        const double dn_pre = dn * (1.0 - n * n);
        const double dr = dn_pre * c.hidden_candidate_pre[k];
        const double dr_pre = dr * r * (1.0 - r);
        const double dz_pre = dz * z * (1.0 - z);
        dgx[k] = dr_pre;
        dgx[H + k] = dz_pre;
        dgx[2 * H + k] = dn_pre;
        dgh[k] = dr_pre;
        dgh[H + k] = dz_pre;
        dgh[2 * H + k] = dn_pre * r;
    }
    const auto& K = kernels::active();
    K.outer_acc(w_input.grad.data.data(), 3 * H, I, dgx.data(), c.input.data());
    K.outer_acc(w_hidden.grad.data.data(), 3 * H, H, dgh.data(), c.hidden_prev.data());
    for (std::size_t k = 0; k < 3 * H; ++k) {
        b_input.grad.data[k] += dgx[k];
        b_hidden.grad.data[k] += dgh[k];
    }
    grad_input.assign(I, 0.0);
    K.gemv_t_acc(w_input.value.data.data(), 3 * H, I, dgx.data(), grad_input.data());
    K.gemv_t_acc(w_hidden.value.data.data(), 3 * H, H, dgh.data(), grad_hidden_prev.data());
}

void GruCell::init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(hidden_size(), 1)));
    for (Parameter* p : parameters()) p->init_uniform(bound, rng);
}

}  // namespace evcs::nn
