#pragma once

#include <cstddef>
#include <utility>

namespace magvit::kernels {

// Dense inner loops used by the quantizer and the predictor. Each kernel has
// a scalar reference implementation and an AVX2 variant; the active backend
// is chosen at runtime from CPU capabilities (override with set_backend or
// the MAGVIT_KERNELS env var: auto|scalar|avx2).
//
// The variants may differ in the low bits because of reassociation and FMA;
// tests bound that difference. Selection results (nearest_centroid indices)
// use the same tie rule in both variants: strictly smaller distance wins, so
// ties resolve to the lowest index.

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
void set_backend(Backend b);     // throws UsageError if unsupported on this host
void reset_backend();            // back to env/CPU auto-detection
const char* backend_name(Backend b);

// sum_i (a[i] - b[i])^2
double l2sq(const double* a, const double* b, std::size_t n);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Index and squared distance of the centroid nearest to x.
// centroids is count rows of dim values, row-major.
std::pair<std::size_t, double> nearest_centroid(const double* x, const double* centroids,
                                                std::size_t count, std::size_t dim);

namespace detail {

struct KernelTable {
    double (*l2sq)(const double*, const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();   // valid only if avx2_supported()

} // namespace detail

} // namespace magvit::kernels
