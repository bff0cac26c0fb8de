#pragma once

// Dense inner loops used by the networks. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant. The variant is picked
// once at startup from CPUID and can be overridden for equivalence testing.

#include <cstddef>
#include <span>

namespace evcs::nn::kernels {

enum class Backend { scalar, avx2 };

struct AdamCoeffs {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double bias1 = 1.0;  // 1 - beta1^t
    double bias2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y = W x + bias, W row-major rows x cols; bias may be null.
    void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y);
    /// dx += W^T dy
    void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* dy,
                       double* dx);
    /// dW += dy x^T
    void (*outer_acc)(double* dw, std::size_t rows, std::size_t cols, const double* dy,
                      const double* x);
    void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoeffs& c);
};

const KernelTable& scalar_table();
/// Null when the variant was not compiled in.
const KernelTable* avx2_table();

bool backend_available(Backend b);
Backend best_backend();
Backend active_backend();
/// Throws ConfigError if the backend is not available on this CPU.
void set_backend(Backend b);
const KernelTable& active();
const char* backend_name(Backend b);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

}  // namespace evcs::nn::kernels
