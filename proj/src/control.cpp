#include "lockbench/control.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lockbench/error.hpp"

namespace lockbench {

void FeedforwardSpec::validate() const {
    if (!(theta_tap > 0.0 && theta_tap < 0.5 * std::numbers::pi)) {
        std::ostringstream os;
        os << "feedforward: theta_tap must lie in (0, pi/2), got " << theta_tap;
        throw ConfigError(os.str());
    }
    if (!std::isfinite(gain)) throw ConfigError("feedforward: gain must be finite");
    if (master_split_sign != 1 && master_split_sign != -1)
        throw ConfigError("feedforward: master_split_sign must be +1 or -1");
    if (actuator_range && !(*actuator_range > 0.0))
        throw ConfigError("feedforward: actuator_range must be positive");
}

double nominal_gain(double theta_tap, double a0, double b0) {
    const double r = std::sin(theta_tap);
    if (!(r > 0.0) || !(a0 > 0.0) || !(b0 > 0.0)) {
        std::ostringstream os;
        os << "nominal_gain: need r, a0, b0 > 0 (r = " << r << ", a0 = " << a0
           << ", b0 = " << b0 << ")";
        throw DomainError(os.str());
    }
    return std::numbers::sqrt2 / (r * a0 * b0);
}

PortPair split_master(const FieldTrace& master, const SeedStream& u_seed) {
    return beam_splitter(master, vacuum_field(master.grid(), u_seed), BeamSplitterSpec{});
}

LockResult feedforward_lock(const FieldTrace& slave, const FieldTrace& master_arm,
                            const FeedforwardSpec& spec, const SeedStream& vacuum_seed) {
    spec.validate();
    require_same_grid(slave.grid(), master_arm.grid(), "feedforward_lock");
    const PortPair bs2 = beam_splitter(slave, vacuum_field(slave.grid(), vacuum_seed),
                                       BeamSplitterSpec{spec.theta_tap});
    PhotocurrentTrace err = error_signal(bs2.out_a, master_arm);
    std::vector<double> phi(err.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double p = spec.gain * err[i];
        if (!std::isfinite(p) || (spec.actuator_range && std::abs(p) > *spec.actuator_range)) {
            const double t = slave.grid().time(i);
            std::ostringstream os;
            os << "feedforward_lock: correction " << p << " rad at t = " << t
               << " s is outside the actuator range";
            throw ActuatorRangeError(os.str(), t);
        }
        phi[i] = p;
    }
    RealTrace correction(slave.grid(), std::move(phi));
    FieldTrace out = phase_shift(bs2.out_b, correction);
    return LockResult{std::move(out), std::move(err), std::move(correction), bs2.out_b};
}

PhotocurrentTrace quadrature_beat(const FieldTrace& f, const FieldTrace& f2) {
    return balanced_homodyne(phase_shift(f, 0.5 * std::numbers::pi), f2);
}

DualLockResult dual_lock(const FieldTrace& slave_a, const FieldTrace& slave_b,
                         const FieldTrace& master, const FeedforwardSpec& spec,
                         const SeedStream& seed) {
    require_same_grid(slave_a.grid(), slave_b.grid(), "dual_lock");
    require_same_grid(slave_a.grid(), master.grid(), "dual_lock");
    std::vector<std::string> warnings;
    const double fa = slave_a.r0(), fb = slave_b.r0();
    if (std::abs(fa - fb) > 1e-9 * std::max(fa, fb)) {
        std::ostringstream os;
        os << "dual_lock: slave amplitudes differ (" << fa << " vs " << fb
           << "); the beat will not reach its balanced level";
        warnings.push_back(os.str());
        warn(os.str());
    }
    PortPair arms = split_master(master, seed.child("u"));
    FeedforwardSpec sa = spec, sb = spec;
    sa.master_split_sign = +1;
    sb.master_split_sign = -1;
    LockResult first = feedforward_lock(slave_a, arms.out_a, sa, seed.child("v"));
    LockResult second = feedforward_lock(slave_b, arms.out_b, sb, seed.child("v'"));
    PhotocurrentTrace beat = quadrature_beat(first.output, second.output);
    return DualLockResult{std::move(first), std::move(second), std::move(arms),
                          std::move(beat), std::move(warnings)};
}

FieldTrace unlock_and_coast(const LockResult& result, double t_off) {
    return unlock_and_coast(result, result.slave_port, t_off);
}

FieldTrace unlock_and_coast(const LockResult& result, const FieldTrace& slave_continuation,
                            double t_off) {
    const TimeGrid& g = result.output.grid();
    require_same_grid(g, slave_continuation.grid(), "unlock_and_coast");
    const std::size_t k = g.samples_in(t_off, "unlock time t_off");
    if (k >= g.n()) {
        std::ostringstream os;
        os << "unlock_and_coast: t_off = " << t_off << " s is beyond the grid end "
           << g.duration() << " s";
        throw ConfigError(os.str());
    }
    const double frozen = result.correction[k];
    const cplx rot = std::polar(1.0, frozen);
    std::vector<cplx> out(result.output.samples().begin(), result.output.samples().end());
    for (std::size_t i = k; i < out.size(); ++i) out[i] = slave_continuation[i] * rot;
    return FieldTrace(g, result.output.mean(), std::move(out));
}

void FeedbackSpec::validate(const TimeGrid& grid) const {
    if (!(loop_gain >= 0.0) || !std::isfinite(loop_gain))
        throw ConfigError("feedback: loop_gain must be finite and >= 0");
    grid.samples_in(loop_delay, "feedback loop_delay");
    if (!(filter_bandwidth > 0.0)) throw ConfigError("feedback: filter_bandwidth must be > 0");
    grid.require_below_nyquist(filter_bandwidth, "feedback filter_bandwidth");
    if (!(theta_tap > 0.0 && theta_tap < 0.5 * std::numbers::pi))
        throw ConfigError("feedback: theta_tap must lie in (0, pi/2)");
    if (!(divergence_factor > 1.0)) throw ConfigError("feedback: divergence_factor must be > 1");
}

namespace {

// Zero crossings of y counted from where it first clears the open-loop noise.
double oscillation_omega(const std::vector<double>& y, std::size_t end, std::size_t span,
                         double floor, double dt) {
    std::size_t begin = end > span ? end - span : 0;
    while (begin < end && std::abs(y[begin]) < floor) ++begin;
    std::size_t first = 0, last = 0, crossings = 0;
    for (std::size_t i = begin + 1; i < end; ++i) {
        if (y[i - 1] * y[i] < 0.0) {
            if (crossings == 0) first = i;
            last = i;
            ++crossings;
        }
    }
    if (crossings < 2) return 0.0;
    return std::numbers::pi * static_cast<double>(crossings - 1) /
           (static_cast<double>(last - first) * dt);
}

}  // namespace

FeedbackResult feedback_lock(const LinearLaserSpec& slave_spec, const FieldTrace& master_arm,
                             const FeedbackSpec& spec, const SeedStream& seed) {
    const TimeGrid& g = master_arm.grid();
    spec.validate(g);
    slave_spec.validate();
    if (!(slave_spec.r0 > 0.0)) throw DomainError("feedback_lock: slave r0 must be > 0");
    const double k0 = master_arm.r0();
    if (!(k0 > 0.0)) throw DomainError("feedback_lock: master arm has zero mean amplitude");

    const FieldTrace free_slave = linearized_laser(slave_spec, g, seed.child("slave"));
    const FieldTrace vac = vacuum_field(g, seed.child("v"));
    const double r = std::sin(spec.theta_tap), t = std::cos(spec.theta_tap);
    const double a0 = slave_spec.r0;
    const double norm = -1.0 / (k0 * r * a0);
    const std::size_t n = g.n();
    const std::size_t D = g.samples_in(spec.loop_delay, "feedback loop_delay");
    const std::size_t window = std::max<std::size_t>(D, 16);
    const double dt = g.dt();
    const double beta = 1.0 - std::exp(-spec.filter_bandwidth * dt);
    const double K = spec.loop_gain;

    std::vector<cplx> out(n), cport(n);
    std::vector<double> err(n), eps(n), y(n), theta(n), freq(n);
    double th = 0.0, yf = 0.0, sq_window = 0.0, open_rms = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const cplx s = free_slave[k] + cplx(0.0, a0 * th);
        const cplx d = r * s + t * vac[k];
        const cplx c = t * s - r * vac[k];
        const cplx m = master_arm[k];
        const double e = d.real() * m.imag() - d.imag() * m.real();
        err[k] = e;
        eps[k] = norm * e;
        cport[k] = c;
        out[k] = c;
        theta[k] = th;

        const double delayed = k >= D ? eps[k - D] : 0.0;
        yf += beta * (delayed - yf);
        y[k] = yf;
        freq[k] = -K * yf;

        sq_window += eps[k] * eps[k];
        if (k >= window) sq_window -= eps[k - window] * eps[k - window];
        if (k + 1 == window) open_rms = std::sqrt(sq_window / static_cast<double>(window));
        if (k + 1 > window && open_rms > 0.0) {
            const double rms = std::sqrt(std::max(0.0, sq_window) / static_cast<double>(window));
            if (!(rms <= spec.divergence_factor * open_rms)) {
                const double w = oscillation_omega(y, k + 1, 8 * window, 100.0 * open_rms, dt);
                std::ostringstream os;
                os << "feedback_lock: loop diverged at t = " << g.time(k) << " s (error RMS "
                   << rms << " vs open-loop " << open_rms << "); oscillation near " << w
                   << " rad/s, loop gain " << K << ", delay " << spec.loop_delay << " s";
                throw InstabilityError(os.str(), w, g.time(k));
            }
        }
        th += freq[k] * dt;
    }
    LockResult lock{FieldTrace(g, cplx(t * a0, 0.0), std::move(out)),
                    make_photocurrent(g, std::move(err)), RealTrace(g, std::move(theta)),
                    FieldTrace(g, cplx(t * a0, 0.0), std::move(cport))};
    return FeedbackResult{std::move(lock), RealTrace(g, std::move(freq)), open_rms};
}

}  // namespace lockbench
