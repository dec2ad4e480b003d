#ifndef PDEBOUND_KERNELS_HPP
#define PDEBOUND_KERNELS_HPP

#include <cstddef>
#include <string>

namespace pdebound::kernels {

// Dense vector kernels behind the conic solver's iteration loop. A scalar
// reference implementation and an AVX2 variant are selected at runtime; both
// use the same 4-accumulator summation tree (and no FMA contraction), so the
// results are bitwise identical across variants.

struct Ops {
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += s*a[i]
    void (*axpy)(double s, const double* a, double* y, std::size_t n);
    // y[i] = s*a[i]
    void (*scale)(double s, const double* a, double* y, std::size_t n);
    // max_i |a[i]|
    double (*norm_inf)(const double* a, std::size_t n);
    const char* name;
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

// Best variant supported by the executing CPU (cached after first call).
const Ops& active_ops();

// Force a specific variant ("scalar" or "avx2"); throws if unsupported.
void select_ops(const std::string& name);

}  // namespace pdebound::kernels

#endif
