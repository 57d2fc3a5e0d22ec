#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lockbench/error.hpp"
#include "lockbench/noise.hpp"
#include "lockbench/optics.hpp"

using namespace lockbench;

namespace {

FieldTrace random_field(const TimeGrid& g, cplx mean, std::uint64_t seed) {
    const FieldTrace v = vacuum_field(g, SeedStream(seed));
    std::vector<cplx> z(v.samples().begin(), v.samples().end());
    for (auto& x : z) x += mean;
    return FieldTrace(g, mean, z);
}

}  // namespace

TEST_CASE("beam splitter is the real orthogonal mixer") {
    const TimeGrid g(0.01, 257);
    const FieldTrace a = random_field(g, cplx(3.0, 1.0), 1);
    const FieldTrace b = random_field(g, cplx(-2.0, 0.5), 2);
    const BeamSplitterSpec bs{0.4};
    const PortPair p = beam_splitter(a, b, bs);
    const double r = std::sin(0.4), t = std::cos(0.4);
    CHECK(bs.r() == doctest::Approx(r));
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(std::abs(p.out_a[i] - (r * a[i] + t * b[i])) < 1e-13);
        CHECK(std::abs(p.out_b[i] - (t * a[i] - r * b[i])) < 1e-13);
        const double in = std::norm(a[i]) + std::norm(b[i]);
        const double out = std::norm(p.out_a[i]) + std::norm(p.out_b[i]);
        CHECK(out == doctest::Approx(in).epsilon(1e-13));
    }
    CHECK(std::abs(p.out_a.mean() - (r * a.mean() + t * b.mean())) < 1e-14);
}

TEST_CASE("the same splitter applied twice restores the inputs") {
    const TimeGrid g(0.01, 64);
    const FieldTrace a = random_field(g, 1.0, 3);
    const FieldTrace b = random_field(g, 0.0, 4);
    const BeamSplitterSpec bs{1.1};
    const PortPair once = beam_splitter(a, b, bs);
    const PortPair twice = beam_splitter(once.out_a, once.out_b, bs);
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(std::abs(twice.out_a[i] - a[i]) < 1e-13);
        CHECK(std::abs(twice.out_b[i] - b[i]) < 1e-13);
    }
}

TEST_CASE("splitter inputs must share a grid") {
    CHECK_THROWS_AS(beam_splitter(random_field(TimeGrid(0.01, 8), 0.0, 1),
                                  random_field(TimeGrid(0.01, 9), 0.0, 2), BeamSplitterSpec{}),
                    ShapeError);
}

TEST_CASE("constant phase shift rotates samples and mean") {
    const TimeGrid g(0.01, 32);
    const FieldTrace a = random_field(g, cplx(2.0, 0.0), 5);
    const FieldTrace b = phase_shift(a, std::numbers::pi / 2);
    CHECK(std::abs(b.mean() - cplx(0.0, 2.0)) < 1e-14);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(std::abs(b[i] - cplx(0.0, 1.0) * a[i]) < 1e-14);
}

TEST_CASE("time-varying phase shift keeps the mean frame") {
    const TimeGrid g(0.01, 32);
    const FieldTrace a = random_field(g, cplx(2.0, 0.0), 6);
    std::vector<double> phi(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) phi[i] = 0.01 * static_cast<double>(i);
    const FieldTrace b = phase_shift(a, RealTrace(g, phi));
    CHECK(b.mean() == a.mean());
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(std::abs(b[i] - a[i] * std::polar(1.0, phi[i])) < 1e-14);
}

TEST_CASE("linearized phase shift adds i mean phi") {
    const TimeGrid g(0.01, 16);
    const FieldTrace a = random_field(g, cplx(10.0, 0.0), 7);
    std::vector<double> phi(g.n(), 0.0);
    phi[3] = 0.02;
    const FieldTrace b = phase_shift_linearized(a, RealTrace(g, phi));
    CHECK(std::abs(b[3] - (a[3] + cplx(0.0, 0.2))) < 1e-14);
    CHECK(b[4] == a[4]);
    const FieldTrace c = phase_shift_linearized(a, 0.01);
    CHECK(std::abs(c[0] - (a[0] + cplx(0.0, 0.1))) < 1e-14);
}

TEST_CASE("delay shifts and fills the lead with vacuum") {
    const TimeGrid g(0.01, 100);
    const FieldTrace a = random_field(g, 5.0, 8);
    const SeedStream vs(9);
    const FieldTrace d = delay(a, 0.1, vs);
    const FieldTrace vac = vacuum_field(TimeGrid(0.01, 10), vs);
    for (std::size_t i = 0; i < 10; ++i) CHECK(d[i] == vac[i]);
    for (std::size_t i = 10; i < g.n(); ++i) CHECK(d[i] == a[i - 10]);
    CHECK(d.mean() == a.mean());
    CHECK_THROWS_AS(delay(a, 0.015, vs), ConfigError);
    const FieldTrace same = delay(a, 0.0, vs);
    CHECK(same[5] == a[5]);
}

TEST_CASE("time gate passes windows and replaces the rest with vacuum") {
    const TimeGrid g(0.01, 100);
    const FieldTrace a = random_field(g, 5.0, 10);
    const FieldTrace gated = time_gate(a, {{0.1, 0.2}, {0.5, 0.6}}, SeedStream(11));
    CHECK(gated[12] == a[12]);
    CHECK(gated[55] == a[55]);
    cplx outside = 0.0;
    for (std::size_t i = 20; i < 50; ++i) outside += gated[i];
    CHECK(std::abs(outside / 30.0) < 2.0);
    CHECK_THROWS_AS(time_gate(a, {{0.1, 0.3}, {0.2, 0.4}}, SeedStream(1)), ConfigError);
    CHECK_THROWS_AS(time_gate(a, {{0.5, 2.0}}, SeedStream(1)), ConfigError);
    CHECK(time_gate(a, {}, SeedStream(1)).mean() == cplx(0.0, 0.0));
}
