#include "lockbench/simd/kernels.hpp"

#include "kernels_impl.hpp"

namespace lockbench::simd {

namespace scalar {

void mix2(const cplx* a, const cplx* b, double r, double t, cplx* out_a, cplx* out_b,
          std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        out_a[i] = cplx(r * ar + t * br, r * ai + t * bi);
        out_b[i] = cplx(t * ar - r * br, t * ai - r * bi);
    }
}

void abs2(const cplx* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = x[i].real(), im = x[i].imag();
        out[i] = re * re + im * im;
    }
}

void beat_re(const cplx* s, const cplx* l, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double p = s[i].real() * l[i].real();
        const double q = s[i].imag() * l[i].imag();
        out[i] = 2.0 * (p + q);
    }
}

void beat_im(const cplx* s, const cplx* l, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double p = s[i].real() * l[i].imag();
        const double q = s[i].imag() * l[i].real();
        out[i] = 2.0 * (p - q);
    }
}

void rotate(const cplx* x, const double* c, const double* s, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        out[i] = cplx(xr * c[i] - xi * s[i], xr * s[i] + xi * c[i]);
    }
}

void window(const double* x, const double* w, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * w[i];
}

void accumulate_power(const cplx* X, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = X[i].real(), im = X[i].imag();
        acc[i] += re * re + im * im;
    }
}

double sum(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double sum_sq(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

}  // namespace scalar

const KernelTable& scalar_kernels() {
    static const KernelTable table{scalar::mix2,   scalar::abs2,   scalar::beat_re,
                                   scalar::beat_im, scalar::rotate, scalar::window,
                                   scalar::accumulate_power, scalar::sum,
                                   scalar::sum_sq, "scalar"};
    return table;
}

}  // namespace lockbench::simd
