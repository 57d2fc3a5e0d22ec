#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace lockbench::simd {

using cplx = std::complex<double>;

// Elementwise kernels. The scalar and AVX2 builds agree bit for bit (no FMA
// contraction in either). Reductions agree to rounding only.
struct KernelTable {
    // out_a = r*a + t*b ; out_b = t*a - r*b
    void (*mix2)(const cplx* a, const cplx* b, double r, double t, cplx* out_a,
                 cplx* out_b, std::size_t n);
    // out = |x|^2
    void (*abs2)(const cplx* x, double* out, std::size_t n);
    // out = 2 Re(conj(s) l)
    void (*beat_re)(const cplx* s, const cplx* l, double* out, std::size_t n);
    // out = 2 Im(conj(s) l)
    void (*beat_im)(const cplx* s, const cplx* l, double* out, std::size_t n);
    // out = x * (c + i s)
    void (*rotate)(const cplx* x, const double* c, const double* s, cplx* out,
                   std::size_t n);
    // out = x * w
    void (*window)(const double* x, const double* w, double* out, std::size_t n);
    // acc += |X|^2
    void (*accumulate_power)(const cplx* X, double* acc, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    std::string_view name;
};

const KernelTable& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

/// Table picked once per process: AVX2 when the CPU has it, unless the
/// environment sets LOCKBENCH_SIMD=scalar.
const KernelTable& kernels();

}  // namespace lockbench::simd
