#include <doctest.h>

#include <cmath>
#include <cstring>
#include <algorithm>
#include <complex>
#include <vector>

#include "lockbench/error.hpp"
#include "lockbench/noise.hpp"
#include "lockbench/simd/kernels.hpp"

using namespace lockbench;
using lockbench::simd::KernelTable;

namespace {

std::vector<double> randoms(std::size_t n, std::uint64_t seed) {
    std::vector<double> x(n);
    SeedStream(seed).fill_normal(x);
    return x;
}

std::vector<cplx> crandoms(std::size_t n, std::uint64_t seed) {
    const auto a = randoms(n, seed), b = randoms(n, seed + 1);
    std::vector<cplx> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = cplx(a[i], b[i]);
    return z;
}

bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }
bool same(cplx a, cplx b) { return same(a.real(), b.real()) && same(a.imag(), b.imag()); }

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 17, 1001};

void check_against_reference(const KernelTable& k) {
    for (std::size_t n : kSizes) {
        const auto a = crandoms(n, 1), b = crandoms(n, 3);
        const auto c = randoms(n, 5), s = randoms(n, 6);
        const double r = 0.6, t = 0.8;
        std::vector<cplx> oa(n), ob(n), rot(n);
        std::vector<double> o(n), win(n), acc(n, 1.0);
        k.mix2(a.data(), b.data(), r, t, oa.data(), ob.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(oa[i] - (r * a[i] + t * b[i])) < 1e-14);
            CHECK(std::abs(ob[i] - (t * a[i] - r * b[i])) < 1e-14);
        }
        k.abs2(a.data(), o.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(o[i] == doctest::Approx(std::norm(a[i])));
        k.beat_re(a.data(), b.data(), o.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(o[i] == doctest::Approx(2.0 * (std::conj(a[i]) * b[i]).real()));
        k.beat_im(a.data(), b.data(), o.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(o[i] == doctest::Approx(2.0 * (std::conj(a[i]) * b[i]).imag()));
        k.rotate(a.data(), c.data(), s.data(), rot.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(rot[i] - a[i] * cplx(c[i], s[i])) < 1e-13);
        k.window(c.data(), s.data(), win.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(win[i] == c[i] * s[i]);
        k.accumulate_power(a.data(), acc.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(acc[i] == doctest::Approx(1.0 + std::norm(a[i])));
        double sum = 0.0, sq = 0.0;
        for (double v : c) {
            sum += v;
            sq += v * v;
        }
        CHECK(k.sum(c.data(), n) == doctest::Approx(sum).epsilon(1e-12));
        CHECK(k.sum_sq(c.data(), n) == doctest::Approx(sq).epsilon(1e-12));
    }
}

}  // namespace

TEST_CASE("scalar kernels match direct complex arithmetic") {
    check_against_reference(simd::scalar_kernels());
}

TEST_CASE("avx2 kernels match direct complex arithmetic") {
    const KernelTable* k = simd::avx2_kernels();
    if (k == nullptr) {
        MESSAGE("AVX2 not available; skipped");
        return;
    }
    check_against_reference(*k);
}

TEST_CASE("avx2 elementwise kernels are bitwise equal to scalar") {
    const KernelTable* v = simd::avx2_kernels();
    if (v == nullptr) return;
    const KernelTable& s = simd::scalar_kernels();
    for (std::size_t n : kSizes) {
        const auto a = crandoms(n, 10), b = crandoms(n, 12);
        const auto c = randoms(n, 14), d = randoms(n, 15);
        std::vector<cplx> x1(n), x2(n), y1(n), y2(n);
        std::vector<double> p1(n), p2(n);
        s.mix2(a.data(), b.data(), 0.3, 0.9539392014169456, x1.data(), y1.data(), n);
        v->mix2(a.data(), b.data(), 0.3, 0.9539392014169456, x2.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK((same(x1[i], x2[i]) && same(y1[i], y2[i])));
        s.rotate(a.data(), c.data(), d.data(), x1.data(), n);
        v->rotate(a.data(), c.data(), d.data(), x2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(x1[i], x2[i]));
        s.abs2(a.data(), p1.data(), n);
        v->abs2(a.data(), p2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(p1[i], p2[i]));
        s.beat_re(a.data(), b.data(), p1.data(), n);
        v->beat_re(a.data(), b.data(), p2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(p1[i], p2[i]));
        s.beat_im(a.data(), b.data(), p1.data(), n);
        v->beat_im(a.data(), b.data(), p2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(p1[i], p2[i]));
        s.window(c.data(), d.data(), p1.data(), n);
        v->window(c.data(), d.data(), p2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(p1[i], p2[i]));
        std::fill(p1.begin(), p1.end(), 0.5);
        std::fill(p2.begin(), p2.end(), 0.5);
        s.accumulate_power(a.data(), p1.data(), n);
        v->accumulate_power(a.data(), p2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(same(p1[i], p2[i]));
    }
}

TEST_CASE("avx2 reductions agree with scalar to rounding") {
    const KernelTable* v = simd::avx2_kernels();
    if (v == nullptr) return;
    const KernelTable& s = simd::scalar_kernels();
    const auto x = randoms(100003, 21);
    CHECK(v->sum(x.data(), x.size()) == doctest::Approx(s.sum(x.data(), x.size())).epsilon(1e-11));
    CHECK(v->sum_sq(x.data(), x.size()) ==
          doctest::Approx(s.sum_sq(x.data(), x.size())).epsilon(1e-13));
}

TEST_CASE("dispatch picks a named table") {
    const auto name = simd::kernels().name;
    CHECK((name == "scalar" || name == "avx2"));
}
