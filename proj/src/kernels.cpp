#include "pdebound/kernels.hpp"

#include <cmath>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#include <immintrin.h>
#endif

namespace pdebound::kernels {

namespace {

// Scalar reference. dot/norm_inf deliberately mirror the 4-lane reduction
// tree of the AVX2 variant so both produce bitwise-identical results.
double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc[0] + acc[2]) + (acc[1] + acc[3])) + tail;
}

void axpy_scalar(double s, const double* a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += s * a[i];
}

void scale_scalar(double s, const double* a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = s * a[i];
}

double norm_inf_scalar(const double* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

const Ops kScalar{dot_scalar, axpy_scalar, scale_scalar, norm_inf_scalar, "scalar"};

#if defined(__x86_64__) || defined(_M_X64)

// mul+add rather than FMA keeps rounding identical to the scalar kernel.
__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b,
                                                std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((lanes[0] + lanes[2]) + (lanes[1] + lanes[3])) + tail;
}

__attribute__((target("avx2"))) void axpy_avx2(double s, const double* a, double* y,
                                               std::size_t n) {
    __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += s * a[i];
}

__attribute__((target("avx2"))) void scale_avx2(double s, const double* a, double* y,
                                                std::size_t n) {
    __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
    for (; i < n; ++i) y[i] = s * a[i];
}

__attribute__((target("avx2"))) double norm_inf_avx2(const double* a, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d vm = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vm = _mm256_max_pd(vm, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vm);
    double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

const Ops kAvx2{dot_avx2, axpy_avx2, scale_avx2, norm_inf_avx2, "avx2"};

bool cpu_has_avx2() {
    unsigned eax, ebx, ecx, edx;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx & (1u << 5)) != 0;  // AVX2 feature bit
}

#endif

const Ops* g_active = nullptr;

}  // namespace

const Ops& scalar_ops() { return kScalar; }

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops() { return kAvx2; }
#endif

const Ops& active_ops() {
    if (!g_active) {
#if defined(__x86_64__) || defined(_M_X64)
        g_active = cpu_has_avx2() ? &kAvx2 : &kScalar;
#else
        g_active = &kScalar;
#endif
    }
    return *g_active;
}

void select_ops(const std::string& name) {
    if (name == "scalar") {
        g_active = &kScalar;
        return;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!cpu_has_avx2()) throw std::runtime_error("avx2 not supported on this CPU");
        g_active = &kAvx2;
        return;
    }
#endif
    throw std::runtime_error("unknown kernel variant '" + name + "'");
}

}  // namespace pdebound::kernels
