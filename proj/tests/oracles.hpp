#pragma once

// Slow, direct reference implementations used to check the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace oracle {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Welch average of Hann-windowed periodograms by direct DFT.
inline std::vector<double> welch(std::span<const double> x, double dt, std::size_t L,
                                 std::size_t step) {
    std::vector<double> w(L);
    double sw = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(L));
        sw += w[i] * w[i];
    }
    std::vector<double> p(L / 2 + 1, 0.0);
    std::size_t segs = 0;
    for (std::size_t s = 0; s + L <= x.size(); s += step, ++segs) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            std::complex<double> acc = 0.0;
            for (std::size_t i = 0; i < L; ++i)
                acc += w[i] * x[s + i] *
                       std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) /
                                           static_cast<double>(L));
            p[k] += std::norm(acc);
        }
    }
    for (auto& v : p) v *= dt / (sw * static_cast<double>(segs));
    return p;
}

// D * integral over [0,T]^2 of max(0, tau - |s - u|), midpoint rule.
inline double overlap_integral(double tau, double T, std::size_t m) {
    const double h = T / static_cast<double>(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) * h;
            acc += std::max(0.0, tau - d);
        }
    return acc * h * h;
}

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace oracle
