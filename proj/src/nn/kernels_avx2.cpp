// Compiled with -mavx2 -mfma. Keep this translation unit free of inline
// library headers so no AVX-encoded copies of shared inline functions leak
// into the rest of the program.

#include "evcs/nn/kernels.hpp"

#if defined(EVCS_HAVE_AVX2)

#include <immintrin.h>

namespace evcs::nn::kernels {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
    }
    for (; k + 4 <= n; k += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
          double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double s = dot(w + r * cols, x, cols);
        y[r] = bias ? bias[r] + s : s;
    }
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(y + k, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
    for (; k < n; ++k) y[k] += alpha * x[k];
}

void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
    for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], w + r * cols, dx, cols);
}

void outer_acc(double* dw, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
    for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], x, dw + r * cols, cols);
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c) {
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d nb1 = _mm256_set1_pd(1.0 - c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d nb2 = _mm256_set1_pd(1.0 - c.beta2);
    const __m256d bias1 = _mm256_set1_pd(c.bias1);
    const __m256d bias2 = _mm256_set1_pd(c.bias2);
    const __m256d lr = _mm256_set1_pd(c.lr);
    const __m256d eps = _mm256_set1_pd(c.eps);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d gk = _mm256_loadu_pd(g + k);
        const __m256d mk = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + k), _mm256_mul_pd(nb1, gk));
        const __m256d vk =
            _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + k), _mm256_mul_pd(_mm256_mul_pd(nb2, gk), gk));
        _mm256_storeu_pd(m + k, mk);
        _mm256_storeu_pd(v + k, vk);
        const __m256d mhat = _mm256_div_pd(mk, bias1);
        const __m256d vhat = _mm256_div_pd(vk, bias2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lr, mhat), denom);
        _mm256_storeu_pd(p + k, _mm256_sub_pd(_mm256_loadu_pd(p + k), upd));
    }
    for (; k < n; ++k) {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        const double mhat = m[k] / c.bias1;
        const double vhat = v[k] / c.bias2;
        p[k] -= c.lr * mhat / (__builtin_sqrt(vhat) + c.eps);
    }
}

constexpr KernelTable kAvx2{"avx2", dot, gemv, gemv_t_acc, outer_acc, adam};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace evcs::nn::kernels

#else

namespace evcs::nn::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace evcs::nn::kernels

#endif
