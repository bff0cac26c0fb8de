#include <cmath>

#include "evcs/nn/kernels.hpp"

namespace evcs::nn::kernels {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
          double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double s = dot(w + r * cols, x, cols);
        y[r] = bias ? bias[r] + s : s;
    }
}

void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dx[c] += g * row[c];
    }
}

void outer_acc(double* dw, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        double* row = dw + r * cols;
        for (std::size_t c = 0; c < cols; ++c) row[c] += g * x[c];
    }
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c) {
    for (std::size_t k = 0; k < n; ++k) {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        const double mhat = m[k] / c.bias1;
        const double vhat = v[k] / c.bias2;
        p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

constexpr KernelTable kScalar{"scalar", dot, gemv, gemv_t_acc, outer_acc, adam};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace evcs::nn::kernels
