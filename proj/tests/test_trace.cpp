#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "lockbench/error.hpp"
#include "lockbench/trace.hpp"

using namespace lockbench;

TEST_CASE("time grid rejects bad dt and tiny n") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid(std::numeric_limits<double>::infinity(), 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid(0.1, 1), ConfigError);
}

TEST_CASE("time grid geometry") {
    const TimeGrid g(0.01, 1000);
    CHECK(g.duration() == doctest::Approx(10.0));
    CHECK(g.nyquist_omega() == doctest::Approx(100.0 * M_PI));
    CHECK(g.time(250) == doctest::Approx(2.5));
    CHECK(g.samples_in(2.0, "tau") == 200);
    CHECK(g.samples_in(0.0, "tau") == 0);
}

TEST_CASE("durations off the grid name the nearest valid value") {
    const TimeGrid g(0.01, 1000);
    try {
        g.samples_in(0.015001, "loop delay");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("loop delay") != std::string::npos);
        CHECK(msg.find("nearest valid value is 0.02") != std::string::npos);
    }
    CHECK_THROWS_AS(g.samples_in(-0.01, "x"), ConfigError);
}

TEST_CASE("nyquist guard") {
    const TimeGrid g(0.01, 100);
    CHECK_NOTHROW(g.require_below_nyquist(300.0, "band"));
    CHECK_THROWS_AS(g.require_below_nyquist(400.0, "band"), ConfigError);
}

TEST_CASE("real trace rejects non-finite samples and size mismatch") {
    const TimeGrid g(0.1, 3);
    CHECK_THROWS_AS(RealTrace(g, {1.0, std::nan(""), 2.0}), DomainError);
    CHECK_THROWS_AS(RealTrace(g, {1.0, 2.0}), ShapeError);
    const RealTrace r(g, {1.0, 2.0, 3.0});
    const RealTrace s = r.slice(1, 2);
    CHECK(s.size() == 2);
    CHECK(s[0] == 2.0);
    CHECK(s.grid().dt() == 0.1);
}

TEST_CASE("field trace quadratures are taken about the mean") {
    const TimeGrid g(0.1, 2);
    const FieldTrace f(g, cplx(3.0, 0.0), {cplx(3.5, 0.25), cplx(2.0, -1.0)});
    CHECK(f.r0() == 3.0);
    CHECK(f.in_phase()[0] == doctest::Approx(0.5));
    CHECK(f.in_phase()[1] == doctest::Approx(-1.0));
    CHECK(f.quadrature()[0] == doctest::Approx(0.25));
    CHECK(f.quadrature()[1] == doctest::Approx(-1.0));
}

TEST_CASE("photocurrents are only made through the factory") {
    const TimeGrid g(0.1, 2);
    const PhotocurrentTrace p = make_photocurrent(g, {1.0, 2.0});
    CHECK(p.as_real()[1] == 2.0);
}

TEST_CASE("grid mismatch is a shape error") {
    CHECK_NOTHROW(require_same_grid(TimeGrid(0.1, 4), TimeGrid(0.1, 4), "op"));
    CHECK_THROWS_AS(require_same_grid(TimeGrid(0.1, 4), TimeGrid(0.1, 5), "op"), ShapeError);
    CHECK_THROWS_AS(require_same_grid(TimeGrid(0.1, 4), TimeGrid(0.2, 4), "op"), ShapeError);
}
