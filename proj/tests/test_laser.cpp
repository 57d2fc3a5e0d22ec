#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lockbench/error.hpp"
#include "lockbench/analysis.hpp"
#include "lockbench/laser.hpp"
#include "oracles.hpp"

using namespace lockbench;

TEST_CASE("linear laser spec validation") {
    CHECK_NOTHROW(LinearLaserSpec{1.0, 0.0}.validate());
    CHECK_THROWS_AS((LinearLaserSpec{1.0, -1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((LinearLaserSpec{std::nan(""), 1.0}.validate()), ConfigError);
}

TEST_CASE("linear laser follows the documented stream layout") {
    const TimeGrid g(0.01, 4096);
    const SeedStream s(8);
    const LinearLaserSpec spec{5.0, 2.0};
    const FieldTrace f = linearized_laser(spec, g, s);
    const RealTrace w1 = white_noise(g, 0.25, s.child(1));
    const RealTrace w2 = white_noise(g, 0.25, s.child(2));
    const RealTrace diff = laser_diffusion_component(spec, g, s);
    const RealTrace wiener = wiener_increment_process(g, spec.gamma * spec.gamma / 4.0, s.child(3));
    CHECK(f.mean() == cplx(5.0, 0.0));
    for (std::size_t i = 0; i < g.n(); i += 97) {
        CHECK(diff[i] == wiener[i]);
        CHECK(f[i].real() == doctest::Approx(5.0 + w1[i]).epsilon(1e-14));
        CHECK(f[i].imag() == doctest::Approx(w2[i] + wiener[i]).epsilon(1e-12));
    }
}

TEST_CASE("coherent limit has flat quadratures at 1/4") {
    const TimeGrid g(0.01, 1 << 16);
    const FieldTrace f = linearized_laser(LinearLaserSpec{3.0, 0.0}, g, SeedStream(2));
    const SpectrumEstimate p1 = welch_psd(f.in_phase(), 1024, 0.5);
    const SpectrumEstimate p2 = welch_psd(f.quadrature(), 1024, 0.5);
    CHECK(band_average(p1, 1.0, 300.0) == doctest::Approx(0.25).epsilon(0.03));
    CHECK(band_average(p2, 1.0, 300.0) == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("short runs warn about the coherence time") {
    std::vector<std::string> got;
    WarningSink old = set_warning_sink([&](const std::string& m) { got.push_back(m); });
    linearized_laser(LinearLaserSpec{1.0, 1.0}, TimeGrid(0.01, 100), SeedStream(1));
    set_warning_sink(std::move(old));
    REQUIRE(got.size() == 1);
    CHECK(got[0].find("10/gamma") != std::string::npos);
}

TEST_CASE("potential geometry") {
    const PotentialLaserSpec spec;
    CHECK(spec.above_threshold());
    CHECK(spec.steady_radius() == doctest::Approx(1.0));
    const double a = spec.steady_radius();
    const double v = potential_value(spec, a);
    CHECK(v < potential_value(spec, 0.9 * a));
    CHECK(v < potential_value(spec, 1.1 * a));
    CHECK(potential_value(spec, cplx(0.0, a)) == doctest::Approx(v));
    // -(g/4) r^2 + (C/4) r^4 at r = 1
    CHECK(v == doctest::Approx(-(1.6 / 4.0) + 0.8 / 4.0));
    PotentialLaserSpec below{0.5, 1.0, 0.8, 0.0};
    CHECK(!below.above_threshold());
    CHECK(below.steady_radius() == 0.0);
}

TEST_CASE("noiseless potential laser relaxes radially at rate alpha - gamma0") {
    const PotentialLaserSpec spec;
    const TimeGrid g(1e-3, 8001);
    const FieldTrace f = nonlinear_laser(spec, g, std::polar(0.9, 0.3), SeedStream(1));
    CHECK(std::abs(f[g.n() - 1]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::arg(f[g.n() - 1]) == doctest::Approx(0.3).epsilon(1e-12));
    std::vector<double> t, logd;
    for (std::size_t i = 2000; i <= 5000; i += 100) {
        t.push_back(g.time(i));
        logd.push_back(std::log(1.0 - std::abs(f[i])));
    }
    const LinearFit fit = fit_line(t, logd);
    CHECK(-fit.slope == doctest::Approx(1.6).epsilon(0.01));
}

TEST_CASE("potential laser guards its time step") {
    const PotentialLaserSpec spec;
    CHECK_THROWS_AS(nonlinear_laser(spec, TimeGrid(0.2, 100), 1.0, SeedStream(1)), ConfigError);
    CHECK_THROWS_AS(nonlinear_laser(spec, TimeGrid(1e-3, 100), 1e3, SeedStream(1)), ConfigError);
    CHECK_THROWS_AS((PotentialLaserSpec{2.6, 1.0, -1.0, 0.0}.validate()), ConfigError);
}

TEST_CASE("linearized potential model shares the forcing") {
    PotentialLaserSpec spec;
    spec.noise_psd = 1e-4;
    const TimeGrid g(1e-3, 2000);
    const FieldTrace nl = nonlinear_laser(spec, g, 1.0, SeedStream(4));
    const FieldTrace lin = linearized_potential_laser(spec, g, SeedStream(4));
    for (std::size_t i = 0; i < g.n(); i += 199) {
        CHECK(std::abs(nl[i] - lin[i]) < 1e-3);
    }
}

TEST_CASE("unwrapped phase follows a fast rotation") {
    const TimeGrid g(0.01, 2000);
    std::vector<cplx> z(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) z[i] = std::polar(2.0, 50.0 * g.time(i));
    const auto ph = unwrapped_phase(FieldTrace(g, 2.0, z));
    CHECK(ph.back() == doctest::Approx(50.0 * g.time(g.n() - 1)).epsilon(1e-9));
}

TEST_CASE("phase diffusion of the linear laser is gamma^2 / (4 r0^2)") {
    const TimeGrid g(0.1, 2048);
    const LinearLaserSpec spec{100.0, 2.0};
    std::vector<FieldTrace> runs;
    for (std::uint64_t k = 0; k < 400; ++k) runs.push_back(linearized_laser(spec, g, SeedStream(k)));
    const PhaseDiffusionFit fit = phase_diffusion_coefficient(runs);
    CHECK(fit.slope == doctest::Approx(4.0 / (4.0 * 1e4)).epsilon(0.15));
    CHECK(fit.r_squared > 0.9);

    std::vector<FieldTrace> other;
    for (std::uint64_t k = 0; k < 400; ++k)
        other.push_back(linearized_laser(spec, g, SeedStream(1000 + k)));
    const PhaseDiffusionFit rel = relative_phase_diffusion(runs, other);
    CHECK(rel.slope == doctest::Approx(2.0 * 4.0 / (4.0 * 1e4)).epsilon(0.15));
}

TEST_CASE("phase diffusion refuses small or below-threshold ensembles") {
    const TimeGrid g(0.01, 256);
    std::vector<FieldTrace> few;
    for (std::uint64_t k = 0; k < 10; ++k)
        few.push_back(linearized_laser(LinearLaserSpec{20.0, 1.0}, g, SeedStream(k)));
    CHECK_THROWS_AS(phase_diffusion_coefficient(few), DiagnosticError);
    std::vector<FieldTrace> dim;
    for (std::uint64_t k = 0; k < 100; ++k)
        dim.push_back(linearized_laser(LinearLaserSpec{0.5, 1.0}, g, SeedStream(k)));
    CHECK_THROWS_AS(phase_diffusion_coefficient(dim), DiagnosticError);
}
