#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lockbench/error.hpp"
#include "lockbench/analysis.hpp"
#include "lockbench/control.hpp"
#include "lockbench/laser.hpp"
#include "lockbench/optics.hpp"

using namespace lockbench;

namespace {

struct Rig {
    TimeGrid g;
    double a0, b0;
    FieldTrace slave, master;
    PortPair arms;
};

Rig make_rig(std::size_t n, double a0, double b0, double gamma) {
    const TimeGrid g(0.01, n);
    FieldTrace slave = linearized_laser(LinearLaserSpec{a0, gamma}, g, SeedStream(1));
    FieldTrace master = linearized_laser(LinearLaserSpec{b0, gamma}, g, SeedStream(2));
    PortPair arms = split_master(master, SeedStream(3));
    return Rig{g, a0, b0, std::move(slave), std::move(master), std::move(arms)};
}

}  // namespace

TEST_CASE("nominal gain") {
    const double r = std::sin(std::numbers::pi / 4);
    CHECK(nominal_gain(std::numbers::pi / 4, 100.0, 1e4) ==
          doctest::Approx(std::sqrt(2.0) / (r * 100.0 * 1e4)));
    CHECK_THROWS_AS(nominal_gain(std::numbers::pi / 4, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(nominal_gain(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("master split uses the given vacuum stream") {
    const TimeGrid g(0.01, 64);
    const FieldTrace b = linearized_laser(LinearLaserSpec{100.0, 0.0}, g, SeedStream(1));
    const SeedStream us(2);
    const PortPair k = split_master(b, us);
    const FieldTrace u = vacuum_field(g, us);
    const double h = std::sqrt(0.5);
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(std::abs(k.out_a[i] - h * (b[i] + u[i])) < 1e-12);
        CHECK(std::abs(k.out_b[i] - h * (b[i] - u[i])) < 1e-12);
    }
}

TEST_CASE("locked output quadrature is white at 1/(4 r^2) + t^2 a0^2 / (2 b0^2)") {
    // Residual quadrature after the nominal correction: -v2/r + sqrt(2) t a0 k2 / b0.
    const Rig rig = make_rig(1 << 17, 100.0, 1e4, 1.0);
    FeedforwardSpec spec;
    spec.gain = nominal_gain(spec.theta_tap, rig.a0, rig.b0);
    const LockResult r = feedforward_lock(rig.slave, rig.arms.out_a, spec, SeedStream(4));
    const double rr = std::sin(spec.theta_tap), t = std::cos(spec.theta_tap);
    const double expected = 0.25 / (rr * rr) + 2.0 * t * t * rig.a0 * rig.a0 / (rig.b0 * rig.b0) * 0.25;
    const SpectrumEstimate p = welch_psd(r.output.quadrature(), 4096, 0.5);
    const ComparisonReport c = compare_psd(
        p, [&](double) { return expected; }, 0.3, 300.0, 0.1, "locked", 10);
    CHECK(c.pass);
}

TEST_CASE("actuator range violations report the first failing time") {
    const Rig rig = make_rig(1024, 100.0, 1e4, 1.0);
    FeedforwardSpec spec;
    spec.gain = nominal_gain(spec.theta_tap, rig.a0, rig.b0);
    spec.actuator_range = 1e-9;
    try {
        feedforward_lock(rig.slave, rig.arms.out_a, spec, SeedStream(4));
        FAIL("expected ActuatorRangeError");
    } catch (const ActuatorRangeError& e) {
        CHECK(e.first_failure_time() >= 0.0);
        CHECK(e.first_failure_time() < rig.g.duration());
    }
}

TEST_CASE("feedforward spec validation") {
    FeedforwardSpec spec;
    spec.gain = 1.0;
    spec.master_split_sign = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.master_split_sign = 1;
    spec.theta_tap = 2.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("unlocking freezes the correction") {
    const Rig rig = make_rig(2048, 100.0, 1e4, 1.0);
    FeedforwardSpec spec;
    spec.gain = nominal_gain(spec.theta_tap, rig.a0, rig.b0);
    const LockResult r = feedforward_lock(rig.slave, rig.arms.out_a, spec, SeedStream(4));
    const FieldTrace coast = unlock_and_coast(r, 10.0);
    const std::size_t k = 1000;
    CHECK(coast[k - 1] == r.output[k - 1]);
    const cplx rot = std::polar(1.0, r.correction[k]);
    for (std::size_t i = k; i < rig.g.n(); i += 37) CHECK(std::abs(coast[i] - r.slave_port[i] * rot) < 1e-12);
    CHECK_THROWS_AS(unlock_and_coast(r, 100.0), ConfigError);
}

TEST_CASE("dual lock wiring and the quadrature beat") {
    const TimeGrid g(0.01, 4096);
    const FieldTrace a = linearized_laser(LinearLaserSpec{100.0, 1.0}, g, SeedStream(1));
    const FieldTrace b = linearized_laser(LinearLaserSpec{100.0, 1.0}, g, SeedStream(2));
    const FieldTrace m = linearized_laser(LinearLaserSpec{1e4, 1.0}, g, SeedStream(3));
    FeedforwardSpec spec;
    spec.gain = nominal_gain(spec.theta_tap, 100.0, 1e4);
    const DualLockResult r = dual_lock(a, b, m, spec, SeedStream(9));
    CHECK(r.warnings.empty());
    const PortPair arms = split_master(m, SeedStream(9).child("u"));
    CHECK(r.master_arms.out_a[17] == arms.out_a[17]);
    for (std::size_t i = 0; i < g.n(); i += 101)
        CHECK(r.beat[i] == doctest::Approx(2.0 * (std::conj(r.first.output[i]) * r.second.output[i]).imag()));

    const FieldTrace c = linearized_laser(LinearLaserSpec{50.0, 1.0}, g, SeedStream(4));
    std::vector<std::string> got;
    WarningSink old = set_warning_sink([&](const std::string& w) { got.push_back(w); });
    const DualLockResult uneven = dual_lock(a, c, m, spec, SeedStream(9));
    set_warning_sink(std::move(old));
    CHECK(!uneven.warnings.empty());
    CHECK(!got.empty());
}

TEST_CASE("feedback spec validation") {
    const TimeGrid g(0.01, 1000);
    FeedbackSpec s;
    s.loop_gain = 1.0;
    s.loop_delay = 0.5;
    CHECK_NOTHROW(s.validate(g));
    s.loop_delay = 0.505;
    CHECK_THROWS_AS(s.validate(g), ConfigError);
    s.loop_delay = 0.5;
    s.filter_bandwidth = 1e4;
    CHECK_THROWS_AS(s.validate(g), ConfigError);
    s.filter_bandwidth = 1.0;
    s.loop_gain = -1.0;
    CHECK_THROWS_AS(s.validate(g), ConfigError);
}

TEST_CASE("stable feedback loop holds the phase; excessive gain diverges") {
    const TimeGrid g(0.01, 1 << 14);
    const FieldTrace m = linearized_laser(LinearLaserSpec{1e4, 0.0}, g, SeedStream(3));
    const PortPair arms = split_master(m, SeedStream(4));
    FeedbackSpec s;
    s.loop_gain = 0.25;
    s.loop_delay = 2.0;
    s.filter_bandwidth = 100.0;
    const LinearLaserSpec slave{100.0, 2.0};
    const FeedbackResult r = feedback_lock(slave, arms.out_a, s, SeedStream(5));
    CHECK(r.open_loop_rms > 0.0);
    // Closed loop: phase variance D/(2K) plus the per-sample white floor.
    const auto ph = unwrapped_phase(r.lock.output);
    double ms = 0.0;
    for (std::size_t i = g.n() / 2; i < g.n(); ++i) ms += ph[i] * ph[i];
    ms /= static_cast<double>(g.n() / 2);
    const double t = std::cos(s.theta_tap);
    const double expected = 1e-4 / (2.0 * 0.25) + 0.25 / g.dt() / (t * t * 1e4);
    CHECK(ms < 3.0 * expected);

    s.loop_gain = 50.0;
    try {
        feedback_lock(slave, arms.out_a, s, SeedStream(5));
        FAIL("expected InstabilityError");
    } catch (const InstabilityError& e) {
        CHECK(e.detection_time() > 0.0);
    }

    // Dominant discrete root at K = 50 sits at 0.786 pi/tau.
    s.divergence_factor = 1e100;
    try {
        feedback_lock(slave, arms.out_a, s, SeedStream(5));
        FAIL("expected InstabilityError");
    } catch (const InstabilityError& e) {
        CHECK(e.oscillation_omega() * s.loop_delay / std::numbers::pi == doctest::Approx(0.786).epsilon(0.03));
    }
}
