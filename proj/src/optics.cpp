#include "lockbench/optics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lockbench/error.hpp"
#include "lockbench/simd/kernels.hpp"

namespace lockbench {

double BeamSplitterSpec::r() const noexcept { return std::sin(theta); }
double BeamSplitterSpec::t() const noexcept { return std::cos(theta); }

PortPair beam_splitter(const FieldTrace& in_a, const FieldTrace& in_b,
                       const BeamSplitterSpec& spec) {
    require_same_grid(in_a.grid(), in_b.grid(), "beam_splitter");
    const double r = spec.r(), t = spec.t();
    const std::size_t n = in_a.size();
    std::vector<cplx> oa(n), ob(n);
    simd::kernels().mix2(in_a.samples().data(), in_b.samples().data(), r, t, oa.data(),
                         ob.data(), n);
    return PortPair{
        FieldTrace(in_a.grid(), r * in_a.mean() + t * in_b.mean(), std::move(oa)),
        FieldTrace(in_a.grid(), t * in_a.mean() - r * in_b.mean(), std::move(ob))};
}

FieldTrace phase_shift(const FieldTrace& in, double phi) {
    const std::size_t n = in.size();
    const std::vector<double> c(n, std::cos(phi)), s(n, std::sin(phi));
    std::vector<cplx> out(n);
    simd::kernels().rotate(in.samples().data(), c.data(), s.data(), out.data(), n);
    return FieldTrace(in.grid(), in.mean() * std::polar(1.0, phi), std::move(out));
}

FieldTrace phase_shift(const FieldTrace& in, const RealTrace& phi) {
    require_same_grid(in.grid(), phi.grid(), "phase_shift");
    const std::size_t n = in.size();
    std::vector<double> c(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = std::cos(phi[i]);
        s[i] = std::sin(phi[i]);
    }
    std::vector<cplx> out(n);
    simd::kernels().rotate(in.samples().data(), c.data(), s.data(), out.data(), n);
    return FieldTrace(in.grid(), in.mean(), std::move(out));
}

FieldTrace phase_shift_linearized(const FieldTrace& in, double phi) {
    const cplx kick = cplx(0.0, phi) * in.mean();
    std::vector<cplx> out(in.samples().begin(), in.samples().end());
    for (cplx& z : out) z += kick;
    return FieldTrace(in.grid(), in.mean() + kick, std::move(out));
}

FieldTrace phase_shift_linearized(const FieldTrace& in, const RealTrace& phi) {
    require_same_grid(in.grid(), phi.grid(), "phase_shift_linearized");
    const cplx im = cplx(0.0, 1.0) * in.mean();
    std::vector<cplx> out(in.samples().begin(), in.samples().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += im * phi[i];
    return FieldTrace(in.grid(), in.mean(), std::move(out));
}

FieldTrace delay(const FieldTrace& in, double tau, const SeedStream& vacuum_seed) {
    const std::size_t k = in.grid().samples_in(tau, "delay tau");
    const std::size_t n = in.size();
    if (k == 0) return in;
    std::vector<cplx> out(n);
    const std::size_t fill = std::min(k, n);
    if (fill >= 2) {
        const FieldTrace vac = vacuum_field(TimeGrid(in.grid().dt(), fill), vacuum_seed);
        std::copy(vac.samples().begin(), vac.samples().end(), out.begin());
    } else {
        const FieldTrace vac = vacuum_field(TimeGrid(in.grid().dt(), 2), vacuum_seed);
        out[0] = vac[0];
    }
    for (std::size_t i = k; i < n; ++i) out[i] = in[i - k];
    return FieldTrace(in.grid(), in.mean(), std::move(out));
}

FieldTrace time_gate(const FieldTrace& in, const std::vector<TimeWindow>& windows,
                     const SeedStream& vacuum_seed) {
    const TimeGrid& g = in.grid();
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    idx.reserve(windows.size());
    for (const auto& [start, stop] : windows) {
        const std::size_t a = g.samples_in(start, "time_gate window start");
        const std::size_t b = g.samples_in(stop, "time_gate window stop");
        if (b < a || b > g.n()) {
            std::ostringstream os;
            os << "time_gate: window [" << start << ", " << stop
               << ") is reversed or extends past the grid end " << g.duration() << " s";
            throw ConfigError(os.str());
        }
        idx.emplace_back(a, b);
    }
    std::vector<std::size_t> order(idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return idx[x].first < idx[y].first; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& p = idx[order[i - 1]];
        const auto& q = idx[order[i]];
        if (q.first < p.second) {
            std::ostringstream os;
            os << "time_gate: windows [" << windows[order[i - 1]].first << ", "
               << windows[order[i - 1]].second << ") and [" << windows[order[i]].first << ", "
               << windows[order[i]].second << ") overlap";
            throw ConfigError(os.str());
        }
    }
    const FieldTrace vac = vacuum_field(g, vacuum_seed);
    std::vector<cplx> out(vac.samples().begin(), vac.samples().end());
    for (const auto& [a, b] : idx)
        for (std::size_t i = a; i < b; ++i) out[i] = in[i];
    const cplx mean = windows.empty() ? cplx(0.0, 0.0) : in.mean();
    return FieldTrace(g, mean, std::move(out));
}

}  // namespace lockbench
