#include "magvit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "magvit/errors.hpp"

namespace magvit::kernels {

namespace detail {

static double l2sq_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

static double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

static void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

const KernelTable& scalar_table() {
    static const KernelTable t{l2sq_scalar, dot_scalar, axpy_scalar};
    return t;
}

} // namespace detail

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("MAGVIT_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_supported())
                throw UsageError("MAGVIT_KERNELS=avx2 but this CPU lacks AVX2/FMA");
            return Backend::avx2;
        }
        if (std::strcmp(env, "auto") != 0)
            throw UsageError(std::string("unknown MAGVIT_KERNELS value: ") + env);
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<const detail::KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const detail::KernelTable* table_for(Backend b) {
    return b == Backend::avx2 ? &detail::avx2_table() : &detail::scalar_table();
}

const detail::KernelTable& table() {
    const detail::KernelTable* t = g_table.load(std::memory_order_acquire);
    if (!t) {
        Backend b = detect_backend();
        t = table_for(b);
        g_backend.store(b, std::memory_order_relaxed);
        g_table.store(t, std::memory_order_release);
    }
    return *t;
}

} // namespace

Backend active_backend() {
    table();
    return g_backend.load(std::memory_order_relaxed);
}

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_supported())
        throw UsageError("AVX2/FMA not available on this CPU");
    g_backend.store(b, std::memory_order_relaxed);
    g_table.store(table_for(b), std::memory_order_release);
}

void reset_backend() {
    g_table.store(nullptr, std::memory_order_release);
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

double l2sq(const double* a, const double* b, std::size_t n) {
    return table().l2sq(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    table().axpy(alpha, x, y, n);
}

std::pair<std::size_t, double> nearest_centroid(const double* x, const double* centroids,
                                                std::size_t count, std::size_t dim) {
    const detail::KernelTable& t = table();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < count; ++c) {
        const double d = t.l2sq(x, centroids + c * dim, dim);
        if (d < best_d) {  // strict: equal distances keep the lower index
            best_d = d;
            best = c;
        }
    }
    return {best, best_d};
}

} // namespace magvit::kernels
