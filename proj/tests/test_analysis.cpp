#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lockbench/error.hpp"
#include "lockbench/analysis.hpp"
#include "lockbench/laser.hpp"
#include "oracles.hpp"

using namespace lockbench;

TEST_CASE("welch matches a direct DFT periodogram") {
    const TimeGrid g(0.05, 300);
    const RealTrace x = white_noise(g, 1.0, SeedStream(1));
    const SpectrumEstimate est = welch_psd(x, 64, 0.5);
    const auto ref = oracle::welch(x.samples(), g.dt(), 64, 32);
    REQUIRE(est.psd.size() == ref.size());
    CHECK(est.n_segments == 8);
    for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(est.psd[k] == doctest::Approx(ref[k]).epsilon(1e-10));
        CHECK(est.omega[k] == doctest::Approx(2.0 * std::numbers::pi * k / (64 * 0.05)));
    }
    CHECK(est.resolution == doctest::Approx(2.0 * std::numbers::pi / (64 * 0.05)));
}

TEST_CASE("welch argument checks") {
    const RealTrace x = white_noise(TimeGrid(0.1, 100), 1.0, SeedStream(1));
    CHECK_THROWS(welch_psd(x, 4, 0.5));
    CHECK_THROWS(welch_psd(x, 128, 0.5));
    CHECK_THROWS(welch_psd(x, 32, 0.95));
}

TEST_CASE("mean detrend removes an offset") {
    const TimeGrid g(0.1, 1024);
    const RealTrace w = white_noise(g, 1.0, SeedStream(2));
    std::vector<double> y(w.samples().begin(), w.samples().end());
    for (auto& v : y) v += 50.0;
    const SpectrumEstimate a = welch_psd(RealTrace(g, y), 128, 0.5, Detrend::mean);
    const SpectrumEstimate b = welch_psd(w, 128, 0.5, Detrend::mean);
    for (std::size_t k = 0; k < a.psd.size(); ++k) CHECK(a.psd[k] == doctest::Approx(b.psd[k]).epsilon(1e-8));
}

TEST_CASE("white noise reads its double-sided level") {
    const TimeGrid g(0.01, 1 << 18);
    const SpectrumEstimate est = welch_psd(white_noise(g, 0.25, SeedStream(3)), 4096, 0.5);
    CHECK(band_average(est, 1.0, 300.0) == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("increment spectrum of a Wiener path is D / Omega^2") {
    const TimeGrid g(0.01, 1 << 20);
    const double D = 0.3;
    const SpectrumEstimate est = increment_psd(wiener_increment_process(g, D, SeedStream(4)), 8192, 0.5);
    CHECK(est.omega.front() > 0.0);
    const ComparisonReport c = compare_psd(
        est, [&](double w) { return D / (w * w); }, 0.1, 5.0, 0.1, "wiener", 5);
    CHECK_MESSAGE(c.pass, c.max_rel_error);
    const LinearFit s = loglog_slope(est.omega, est.psd, 0.1, 5.0);
    CHECK(s.slope == doctest::Approx(-2.0).epsilon(0.03));
}

TEST_CASE("cross spectrum of a trace with itself is its PSD") {
    const TimeGrid g(0.01, 4096);
    const RealTrace x = white_noise(g, 1.0, SeedStream(5));
    const CrossSpectrum c = welch_cross_psd(x, x, 512, 0.5);
    const SpectrumEstimate p = welch_psd(x, 512, 0.5);
    for (std::size_t k = 0; k < p.psd.size(); ++k) {
        CHECK(c.csd[k].real() == doctest::Approx(p.psd[k]).epsilon(1e-10));
        CHECK(std::abs(c.csd[k].imag()) < 1e-12 * (1.0 + p.psd[k]));
    }
}

TEST_CASE("fits") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y, q, s;
    for (double v : x) {
        y.push_back(3.0 * v - 1.0);
        q.push_back(2.0 * (v - 2.5) * (v - 2.5) + 1.0);
        s.push_back(4.0 * std::sqrt(v));
    }
    const LinearFit l = fit_line(x, y);
    CHECK(l.slope == doctest::Approx(3.0));
    CHECK(l.intercept == doctest::Approx(-1.0));
    CHECK(l.r_squared == doctest::Approx(1.0));
    const LinearFit o = fit_line_through_origin(x, x);
    CHECK(o.slope == doctest::Approx(1.0));
    const QuadraticFit f = fit_quadratic(x, q);
    CHECK(f.a == doctest::Approx(2.0));
    CHECK(f.vertex() == doctest::Approx(2.5));
    const SqrtGrowthFit g = fit_sqrt_growth(x, s);
    CHECK(g.c == doctest::Approx(4.0));
    CHECK(g.r_squared == doctest::Approx(1.0));
}

TEST_CASE("reference curves") {
    CurveParams p;
    p.gamma = 2.0;
    CHECK(analytic_curve(CurveKind::coherent_quadrature, p)(3.0) == 0.25);
    CHECK(analytic_curve(CurveKind::laser_quad2, p)(2.0) == doctest::Approx(0.5));
    CHECK(std::isinf(analytic_curve(CurveKind::laser_quad2, p)(0.0)));
    p.a0 = 100.0;
    CHECK(analytic_curve(CurveKind::locked_beat, p)(1.0) == doctest::Approx(2e4));
    p.b0 = 1e4;
    CHECK(analytic_curve(CurveKind::locked_beat, p)(1.0) == doctest::Approx(2e4 + 4.0 * 0.25 * 1e8 / 1e8));
    CHECK(parse_curve_kind(to_string(CurveKind::delayed_homodyne_spectrum)) ==
          CurveKind::delayed_homodyne_spectrum);
    CHECK_THROWS(parse_curve_kind("nope"));
}

TEST_CASE("delayed homodyne spectrum integrates to the exact variance") {
    // variance = (1/2pi) * integral over the full axis of the spectrum
    CurveParams p;
    p.r0 = 3.0;
    p.gamma = 0.7;
    p.tau = 2.0;
    p.T = 1.0;
    const auto s = analytic_curve(CurveKind::delayed_homodyne_spectrum, p);
    double acc = 0.0;
    const double h = 1e-3;
    for (double w = h / 2; w < 4000.0; w += h) acc += s(w) * h;
    acc *= 2.0 / (2.0 * std::numbers::pi);
    CHECK(acc == doctest::Approx(delayed_homodyne_variance_exact(3.0, 0.7, 2.0, 1.0)).epsilon(2e-3));
}

TEST_CASE("exact delayed-homodyne variance matches the overlap integral") {
    for (double tau : {1.0, 1.5, 4.0}) {
        const double r0 = 2.0, gamma = 0.8, T = 1.0;
        const double white = 2.0 * r0 * r0 * T;
        const double diff = 4.0 * r0 * r0 * (gamma * gamma / 4.0) * oracle::overlap_integral(tau, T, 800);
        CHECK(delayed_homodyne_variance_exact(r0, gamma, tau, T) ==
              doctest::Approx(white + diff).epsilon(1e-4));
    }
    CHECK(delayed_homodyne_variance_printed(1.0, 1.0, 2.0, 1.0, +1) ==
          doctest::Approx(1.0 * (2.0 + 2.0 * (1.0 - 1.0 / 12.0))));
    CHECK(delayed_homodyne_variance_printed(1.0, 1.0, 2.0, 1.0, -1) ==
          doctest::Approx(1.0 * (2.0 - 2.0 * (1.0 - 1.0 / 12.0))));
}

TEST_CASE("compare_psd bookkeeping") {
    SpectrumEstimate est;
    for (int k = 0; k < 50; ++k) {
        est.omega.push_back(0.1 * k);
        est.psd.push_back(k % 2 == 0 ? 1.05 : 0.95);
    }
    const auto one = [](double) { return 1.0; };
    const ComparisonReport a = compare_psd(est, one, 0.5, 4.5, 0.06);
    CHECK(a.pass);
    CHECK(a.max_rel_error == doctest::Approx(0.05));
    const ComparisonReport b = compare_psd(est, one, 0.5, 4.5, 0.04);
    CHECK(!b.pass);
    const ComparisonReport c = compare_psd(est, one, 0.5, 4.5, 0.04, "grouped", 3);
    CHECK(c.pass);
    CHECK_THROWS(compare_psd(est, one, 0.5, 1.0, 0.1));
    CHECK_THROWS(compare_psd(est, [](double) { return 0.0; }, 0.5, 4.5, 0.1));
}

TEST_CASE("coherence of identical and unrelated fields") {
    const TimeGrid g(0.01, 20000);
    const FieldTrace f = linearized_laser(LinearLaserSpec{100.0, 0.0}, g, SeedStream(1));
    const CoherenceReport same = coherence_metric(f, f, 1.0);
    CHECK(same.g1_modulus == doctest::Approx(1.0));
    CHECK(same.condition_ratio == doctest::Approx(0.0));
    CHECK(same.pass);
    CHECK(same.band_hi == doctest::Approx(std::numbers::pi));
    CHECK(same.n_blocks == 200);

    std::vector<cplx> rot(f.samples().begin(), f.samples().end());
    for (std::size_t i = 0; i < rot.size(); ++i) rot[i] *= std::polar(1.0, 3.0 * g.time(i));
    const CoherenceReport moving = coherence_metric(f, FieldTrace(g, f.mean(), rot), 1.0);
    CHECK(moving.g1_modulus < 0.1);
    CHECK(!moving.pass);
}

TEST_CASE("coherence margin arithmetic") {
    const CoherenceMargin m = coherence_margin(5e7, 0.5, 1.0);
    CHECK(m.condition_ratio == doctest::Approx(std::sqrt(0.5) / 5e7));
    CHECK(m.orders == doctest::Approx(-std::log10(std::sqrt(0.5) / 5e7)));
}

TEST_CASE("coherent-state mode statistics") {
    const TimeGrid g(0.01, 150000);
    std::vector<FieldTrace> runs{linearized_laser(LinearLaserSpec{3.0, 0.0}, g, SeedStream(6))};
    const TableStats s = ensemble_table_stats(runs, 1.0, TableOptions{}, SeedStream(7));
    CHECK(s.modes == 1500);
    CHECK(std::abs(s.n_mean.value - 9.0) < 4.0 * s.n_mean.stderr_);
    CHECK(std::abs(s.n_var.value - 9.0) < 4.0 * s.n_var.stderr_);
    CHECK(std::abs(s.a1_mean.value - 3.0) < 4.0 * s.a1_mean.stderr_);
    CHECK(std::abs(s.a2_mean.value) < 4.0 * s.a2_mean.stderr_);
    CHECK(std::abs(s.a1_var.value - 0.25) < 4.0 * s.a1_var.stderr_);
    CHECK(std::abs(s.a2_var.value - 0.25) < 4.0 * s.a2_var.stderr_);
}

TEST_CASE("stationarity") {
    const TimeGrid g(0.01, 100000);
    CHECK(stationarity_check(white_noise(g, 1.0, SeedStream(8)).samples()).pass);
    const RealTrace w = white_noise(g, 1.0, SeedStream(9));
    std::vector<double> ramp(w.samples().begin(), w.samples().end());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] *= 1.0 + static_cast<double>(i) / 50000.0;
    CHECK(!stationarity_check(ramp).pass);
}
