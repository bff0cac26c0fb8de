#include "evcs/nn/kernels.hpp"

#include <atomic>

#include "evcs/error.hpp"

namespace evcs::nn::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &scalar_table();
        case Backend::avx2:
            return cpu_has_avx2() ? avx2_table() : nullptr;
    }
    return nullptr;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{table_for(best_backend())};
    return current;
}

}  // namespace

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend best_backend() { return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar; }

Backend active_backend() {
    return slot().load() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend b) {
    const KernelTable* t = table_for(b);
    if (!t) throw ConfigError(std::string("kernel backend '") + backend_name(b) + "' is not available");
    slot().store(t);
}

const KernelTable& active() { return *slot().load(); }

const char* backend_name(Backend b) { return b == Backend::scalar ? "scalar" : "avx2"; }

}  // namespace evcs::nn::kernels
