#include "kernels_impl.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace lockbench::simd {

namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

// Pairwise horizontal op on four complex values held in two registers,
// returned in element order.
inline __m256d hadd_ordered(__m256d a, __m256d b) {
    return _mm256_permute4x64_pd(_mm256_hadd_pd(a, b), 0b11011000);
}
inline __m256d hsub_ordered(__m256d a, __m256d b) {
    return _mm256_permute4x64_pd(_mm256_hsub_pd(a, b), 0b11011000);
}

void mix2(const cplx* a, const cplx* b, double r, double t, cplx* out_a, cplx* out_b,
          std::size_t n) {
    const __m256d vr = _mm256_set1_pd(r), vt = _mm256_set1_pd(t);
    const double* pa = dp(a);
    const double* pb = dp(b);
    double* qa = dp(out_a);
    double* qb = dp(out_b);
    const std::size_t m = 2 * n;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d x = _mm256_loadu_pd(pa + i);
        const __m256d y = _mm256_loadu_pd(pb + i);
        _mm256_storeu_pd(qa + i, _mm256_add_pd(_mm256_mul_pd(vr, x), _mm256_mul_pd(vt, y)));
        _mm256_storeu_pd(qb + i, _mm256_sub_pd(_mm256_mul_pd(vt, x), _mm256_mul_pd(vr, y)));
    }
    for (; i < m; ++i) {
        const double x = pa[i], y = pb[i];
        qa[i] = r * x + t * y;
        qb[i] = t * x - r * y;
    }
}

void abs2(const cplx* x, double* out, std::size_t n) {
    const double* p = dp(x);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u = _mm256_loadu_pd(p + 2 * i);
        const __m256d v = _mm256_loadu_pd(p + 2 * i + 4);
        _mm256_storeu_pd(out + i, hadd_ordered(_mm256_mul_pd(u, u), _mm256_mul_pd(v, v)));
    }
    for (; i < n; ++i) {
        const double re = x[i].real(), im = x[i].imag();
        out[i] = re * re + im * im;
    }
}

void beat_re(const cplx* s, const cplx* l, double* out, std::size_t n) {
    const double* ps = dp(s);
    const double* pl = dp(l);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m0 = _mm256_mul_pd(_mm256_loadu_pd(ps + 2 * i), _mm256_loadu_pd(pl + 2 * i));
        const __m256d m1 =
            _mm256_mul_pd(_mm256_loadu_pd(ps + 2 * i + 4), _mm256_loadu_pd(pl + 2 * i + 4));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(two, hadd_ordered(m0, m1)));
    }
    for (; i < n; ++i) {
        const double p = s[i].real() * l[i].real();
        const double q = s[i].imag() * l[i].imag();
        out[i] = 2.0 * (p + q);
    }
}

void beat_im(const cplx* s, const cplx* l, double* out, std::size_t n) {
    const double* ps = dp(s);
    const double* pl = dp(l);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l0 = _mm256_permute_pd(_mm256_loadu_pd(pl + 2 * i), 0b0101);
        const __m256d l1 = _mm256_permute_pd(_mm256_loadu_pd(pl + 2 * i + 4), 0b0101);
        const __m256d m0 = _mm256_mul_pd(_mm256_loadu_pd(ps + 2 * i), l0);
        const __m256d m1 = _mm256_mul_pd(_mm256_loadu_pd(ps + 2 * i + 4), l1);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(two, hsub_ordered(m0, m1)));
    }
    for (; i < n; ++i) {
        const double p = s[i].real() * l[i].imag();
        const double q = s[i].imag() * l[i].real();
        out[i] = 2.0 * (p - q);
    }
}

void rotate(const cplx* x, const double* c, const double* s, cplx* out, std::size_t n) {
    const double* px = dp(x);
    double* po = dp(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(px + 2 * i);
        const __m256d vc =
            _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(c + i)), 0b01010000);
        const __m256d vs =
            _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(s + i)), 0b01010000);
        const __m256d sw = _mm256_permute_pd(v, 0b0101);
        _mm256_storeu_pd(po + 2 * i, _mm256_addsub_pd(_mm256_mul_pd(v, vc), _mm256_mul_pd(sw, vs)));
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        out[i] = cplx(xr * c[i] - xi * s[i], xr * s[i] + xi * c[i]);
    }
}

void window(const double* x, const double* w, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i)));
    for (; i < n; ++i) out[i] = x[i] * w[i];
}

void accumulate_power(const cplx* X, double* acc, std::size_t n) {
    const double* p = dp(X);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u = _mm256_loadu_pd(p + 2 * i);
        const __m256d v = _mm256_loadu_pd(p + 2 * i + 4);
        const __m256d pw = hadd_ordered(_mm256_mul_pd(u, u), _mm256_mul_pd(v, v));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), pw));
    }
    for (; i < n; ++i) {
        const double re = X[i].real(), im = X[i].imag();
        acc[i] += re * re + im * im;
    }
}

double hsum(__m256d v) {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return (t[0] + t[1]) + (t[2] + t[3]);
}

double sum(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq(const double* x, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d u = _mm256_loadu_pd(x + i);
        const __m256d v = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(u, u));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(v, v));
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace

namespace detail {

const KernelTable* avx2_table() {
    static const KernelTable table{mix2,   abs2,   beat_re,          beat_im, rotate,
                                   window, accumulate_power, sum, sum_sq,  "avx2"};
    return &table;
}

}  // namespace detail

}  // namespace lockbench::simd

#else

namespace lockbench::simd::detail {

const KernelTable* avx2_table() { return nullptr; }

}  // namespace lockbench::simd::detail

#endif
