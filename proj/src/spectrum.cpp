#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "lockbench/analysis.hpp"
#include "lockbench/error.hpp"
#include "lockbench/simd/kernels.hpp"

namespace lockbench {

namespace {

std::mutex planner_mutex;

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using fftw_ptr = std::unique_ptr<T[], FftwFree>;

template <class T>
fftw_ptr<T> fftw_alloc(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) throw std::bad_alloc();
    return fftw_ptr<T>(p);
}

class R2C {
  public:
    explicit R2C(std::size_t n)
        : n_(n), in_(fftw_alloc<double>(n)), out_(fftw_alloc<fftw_complex>(n / 2 + 1)) {
        std::lock_guard lock(planner_mutex);
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
        if (plan_ == nullptr) throw Error("fftw: could not create plan");
    }
    R2C(const R2C&) = delete;
    R2C& operator=(const R2C&) = delete;
    ~R2C() {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan_);
    }

    double* in() noexcept { return in_.get(); }
    const std::complex<double>* out() const noexcept {
        return reinterpret_cast<const std::complex<double>*>(out_.get());
    }
    void run() noexcept { fftw_execute(plan_); }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

  private:
    std::size_t n_;
    fftw_ptr<double> in_;
    fftw_ptr<fftw_complex> out_;
    fftw_plan plan_ = nullptr;
};

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

struct Segmentation {
    std::size_t step;
    std::size_t count;
};

Segmentation segment(std::size_t n, std::size_t len, double overlap) {
    if (len < 8) throw ConfigError("welch: segment_len must be at least 8");
    if (len > n) {
        std::ostringstream os;
        os << "welch: segment_len " << len << " exceeds trace length " << n;
        throw ConfigError(os.str());
    }
    if (!(overlap >= 0.0 && overlap <= 0.9)) {
        std::ostringstream os;
        os << "welch: overlap must lie in [0, 0.9], got " << overlap;
        throw ConfigError(os.str());
    }
    std::size_t step = len - static_cast<std::size_t>(std::llround(overlap * static_cast<double>(len)));
    if (step == 0) step = 1;
    return {step, (n - len) / step + 1};
}

void load_segment(const double* src, std::size_t len, const std::vector<double>& w,
                  Detrend detrend, double* dst) {
    const auto& k = simd::kernels();
    if (detrend == Detrend::mean) {
        const double m = k.sum(src, len) / static_cast<double>(len);
        for (std::size_t i = 0; i < len; ++i) dst[i] = (src[i] - m) * w[i];
    } else {
        k.window(src, w.data(), dst, len);
    }
}

}  // namespace

SpectrumEstimate welch_psd(const RealTrace& trace, std::size_t segment_len, double overlap,
                           Detrend detrend) {
    return welch_psd(trace.samples(), trace.grid().dt(), segment_len, overlap, detrend);
}

SpectrumEstimate welch_psd(std::span<const double> samples, double dt, std::size_t segment_len,
                           double overlap, Detrend detrend) {
    const Segmentation seg = segment(samples.size(), segment_len, overlap);
    const std::vector<double> w = hann(segment_len);
    const double wss = simd::kernels().sum_sq(w.data(), w.size());
    R2C fft(segment_len);
    std::vector<double> acc(fft.bins(), 0.0);
    for (std::size_t s = 0; s < seg.count; ++s) {
        load_segment(samples.data() + s * seg.step, segment_len, w, detrend, fft.in());
        fft.run();
        simd::kernels().accumulate_power(fft.out(), acc.data(), acc.size());
    }
    SpectrumEstimate est;
    est.n_segments = seg.count;
    est.segment_len = segment_len;
    est.resolution = 2.0 * std::numbers::pi / (static_cast<double>(segment_len) * dt);
    est.omega.resize(acc.size());
    est.psd.resize(acc.size());
    const double scale = dt / (wss * static_cast<double>(seg.count));
    for (std::size_t k = 0; k < acc.size(); ++k) {
        est.omega[k] = est.resolution * static_cast<double>(k);
        est.psd[k] = acc[k] * scale;
    }
    return est;
}

SpectrumEstimate increment_psd(const RealTrace& trace, std::size_t segment_len, double overlap) {
    const auto x = trace.samples();
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    const double dt = trace.grid().dt();
    SpectrumEstimate inc = welch_psd(d, dt, segment_len, overlap);
    SpectrumEstimate est = inc;
    est.omega.erase(est.omega.begin());
    est.psd.erase(est.psd.begin());
    for (std::size_t k = 0; k < est.psd.size(); ++k) {
        const double s = std::sin(0.5 * est.omega[k] * dt);
        est.psd[k] /= 4.0 * s * s;
    }
    return est;
}

CrossSpectrum welch_cross_psd(const RealTrace& a, const RealTrace& b, std::size_t segment_len,
                              double overlap) {
    require_same_grid(a.grid(), b.grid(), "welch_cross_psd");
    const Segmentation seg = segment(a.size(), segment_len, overlap);
    const std::vector<double> w = hann(segment_len);
    const double wss = simd::kernels().sum_sq(w.data(), w.size());
    R2C fa(segment_len), fb(segment_len);
    std::vector<std::complex<double>> acc(fa.bins());
    for (std::size_t s = 0; s < seg.count; ++s) {
        load_segment(a.samples().data() + s * seg.step, segment_len, w, Detrend::none, fa.in());
        load_segment(b.samples().data() + s * seg.step, segment_len, w, Detrend::none, fb.in());
        fa.run();
        fb.run();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += fa.out()[k] * std::conj(fb.out()[k]);
    }
    const double dt = a.grid().dt();
    CrossSpectrum cs;
    cs.n_segments = seg.count;
    cs.omega.resize(acc.size());
    cs.csd.resize(acc.size());
    const double res = 2.0 * std::numbers::pi / (static_cast<double>(segment_len) * dt);
    const double scale = dt / (wss * static_cast<double>(seg.count));
    for (std::size_t k = 0; k < acc.size(); ++k) {
        cs.omega[k] = res * static_cast<double>(k);
        cs.csd[k] = acc[k] * scale;
    }
    return cs;
}

double band_average(const SpectrumEstimate& est, double lo, double hi) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < est.omega.size(); ++k) {
        if (est.omega[k] >= lo && est.omega[k] <= hi) {
            s += est.psd[k];
            ++n;
        }
    }
    if (n == 0) {
        std::ostringstream os;
        os << "band_average: no bins in [" << lo << ", " << hi << "] rad/s";
        throw DomainError(os.str());
    }
    return s / static_cast<double>(n);
}

}  // namespace lockbench
