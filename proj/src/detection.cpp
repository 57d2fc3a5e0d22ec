#include "lockbench/detection.hpp"

#include <sstream>

#include "lockbench/error.hpp"
#include "lockbench/optics.hpp"
#include "lockbench/simd/kernels.hpp"

namespace lockbench {

PhotocurrentTrace photocurrent(const FieldTrace& in) {
    std::vector<double> out(in.size());
    simd::kernels().abs2(in.samples().data(), out.data(), in.size());
    return make_photocurrent(in.grid(), std::move(out));
}

DetectorPair homodyne_detectors(const FieldTrace& sig, const FieldTrace& lo) {
    const PortPair p = beam_splitter(sig, lo, BeamSplitterSpec{});
    return DetectorPair{photocurrent(p.out_a), photocurrent(p.out_b)};
}

PhotocurrentTrace balanced_homodyne(const FieldTrace& sig, const FieldTrace& lo) {
    require_same_grid(sig.grid(), lo.grid(), "balanced_homodyne");
    std::vector<double> out(sig.size());
    simd::kernels().beat_re(sig.samples().data(), lo.samples().data(), out.data(), sig.size());
    return make_photocurrent(sig.grid(), std::move(out));
}

PhotocurrentTrace error_signal(const FieldTrace& slave_tap, const FieldTrace& master_arm) {
    require_same_grid(slave_tap.grid(), master_arm.grid(), "error_signal");
    std::vector<double> out(slave_tap.size());
    simd::kernels().beat_im(slave_tap.samples().data(), master_arm.samples().data(), out.data(),
                            out.size());
    for (double& v : out) v *= 0.5;
    return make_photocurrent(slave_tap.grid(), std::move(out));
}

ModeSampleSeries mode_integrate(const RealTrace& in, double T) {
    const std::size_t k = in.grid().samples_in(T, "mode duration T");
    if (k == 0) throw ConfigError("mode_integrate: T must be at least one sample");
    const std::size_t modes = in.size() / k;
    if (modes == 0) {
        std::ostringstream os;
        os << "mode_integrate: trace of " << in.grid().duration() << " s is shorter than T = " << T
           << " s";
        throw ConfigError(os.str());
    }
    ModeSampleSeries out;
    out.T = T;
    out.values.resize(modes);
    const auto& kt = simd::kernels();
    for (std::size_t m = 0; m < modes; ++m)
        out.values[m] = kt.sum(in.samples().data() + m * k, k) * in.grid().dt();
    return out;
}

ModeSampleSeries mode_integrate(const PhotocurrentTrace& in, double T) {
    return mode_integrate(in.as_real(), T);
}

double delayed_two_mode_homodyne(const FieldTrace& laser, const FieldTrace& lo, double t0,
                                 double tau, double T, const SeedStream& vacuum_seed) {
    require_same_grid(laser.grid(), lo.grid(), "delayed_two_mode_homodyne");
    const TimeGrid& g = laser.grid();
    if (tau < T) {
        std::ostringstream os;
        os << "delayed_two_mode_homodyne: tau = " << tau << " s must be >= T = " << T << " s";
        throw DomainError(os.str());
    }
    const std::size_t i0 = g.samples_in(t0, "delayed homodyne t0");
    const std::size_t kt = g.samples_in(tau, "delayed homodyne tau");
    const std::size_t km = g.samples_in(T, "delayed homodyne T");
    if (km == 0) throw ConfigError("delayed_two_mode_homodyne: T must be at least one sample");
    if (i0 + kt + km > g.n()) {
        std::ostringstream os;
        os << "delayed_two_mode_homodyne: t0 + tau + T = " << t0 + tau + T
           << " s exceeds the grid duration " << g.duration() << " s";
        throw ConfigError(os.str());
    }
    const double a = g.time(i0), b = g.time(i0 + km);
    const double c = g.time(i0 + kt), d = g.time(i0 + kt + km);
    const FieldTrace early = time_gate(lo, {{a, b}}, vacuum_seed.child(std::uint64_t{1}));
    const FieldTrace delayed = delay(early, tau, vacuum_seed.child(std::uint64_t{2}));
    const FieldTrace late = time_gate(laser, {{c, d}}, vacuum_seed.child(std::uint64_t{3}));
    std::vector<double> beat(g.n());
    simd::kernels().beat_im(delayed.samples().data(), late.samples().data(), beat.data(),
                            beat.size());
    return simd::kernels().sum(beat.data() + i0 + kt, km) * g.dt();
}

}  // namespace lockbench
