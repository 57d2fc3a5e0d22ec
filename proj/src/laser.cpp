#include "lockbench/laser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lockbench/error.hpp"

namespace lockbench {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

SeedStream stream(const SeedStream& seed, LaserStream s) {
    return seed.child(static_cast<std::uint64_t>(s));
}

PhaseDiffusionFit fit_variance_growth(const std::vector<std::vector<double>>& phases,
                                      const TimeGrid& grid) {
    const std::size_t m = phases.size();
    const std::size_t n = grid.n();
    const std::size_t points = std::min<std::size_t>(n, 256);
    std::vector<double> ts, vs;
    ts.reserve(points);
    vs.reserve(points);
    for (std::size_t p = 0; p < points; ++p) {
        const std::size_t k = p * (n - 1) / (points - 1);
        double s = 0.0, s2 = 0.0;
        for (const auto& ph : phases) {
            const double d = ph[k] - ph[0];
            s += d;
            s2 += d * d;
        }
        const double mean = s / static_cast<double>(m);
        ts.push_back(grid.time(k));
        vs.push_back((s2 - s * mean) / static_cast<double>(m - 1));
    }
    double mt = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        mt += ts[i];
        mv += vs[i];
    }
    mt /= static_cast<double>(ts.size());
    mv /= static_cast<double>(ts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - mt) * (ts[i] - mt);
        sxy += (ts[i] - mt) * (vs[i] - mv);
        syy += (vs[i] - mv) * (vs[i] - mv);
    }
    PhaseDiffusionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mv - fit.slope * mt;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

void require_above_threshold(const FieldTrace& f, std::size_t index) {
    double s = 0.0, s2 = 0.0;
    for (const cplx& z : f.samples()) {
        const double r = std::abs(z);
        s += r;
        s2 += r * r;
    }
    const double n = static_cast<double>(f.size());
    const double mean = s / n;
    const double sd = std::sqrt(std::max(0.0, s2 / n - mean * mean));
    if (!(mean > 3.0 * sd)) {
        std::ostringstream os;
        os << "phase diffusion: member " << index << " has mean |a| = " << mean
           << " within three standard deviations (" << sd
           << ") of zero; the laser is not above threshold";
        throw DiagnosticError(os.str());
    }
}

void require_ensemble(std::span<const FieldTrace> e) {
    if (e.size() < 100)
        throw DiagnosticError("phase diffusion: need at least 100 ensemble members, got " +
                              std::to_string(e.size()));
    for (const auto& f : e) require_same_grid(e[0].grid(), f.grid(), "phase diffusion");
}

}  // namespace

void LinearLaserSpec::validate() const {
    if (!finite_nonneg(r0) || !finite_nonneg(gamma)) {
        std::ostringstream os;
        os << "linear laser: r0 and gamma must be finite and >= 0 (r0 = " << r0
           << ", gamma = " << gamma << ")";
        throw ConfigError(os.str());
    }
}

void PotentialLaserSpec::validate() const {
    if (!(gamma0 > 0.0) || !(C > 0.0) || !std::isfinite(alpha) || !std::isfinite(gamma0) ||
        !std::isfinite(C) || !finite_nonneg(noise_psd)) {
        std::ostringstream os;
        os << "potential laser: need gamma0 > 0, C > 0, finite alpha and noise_psd >= 0 "
           << "(alpha = " << alpha << ", gamma0 = " << gamma0 << ", C = " << C
           << ", noise_psd = " << noise_psd << ")";
        throw ConfigError(os.str());
    }
}

double PotentialLaserSpec::steady_radius() const noexcept {
    return above_threshold() ? std::sqrt((alpha - gamma0) / (2.0 * C)) : 0.0;
}

FieldTrace linearized_laser(const LinearLaserSpec& spec, const TimeGrid& grid,
                            const SeedStream& seed) {
    spec.validate();
    if (spec.gamma > 0.0 && grid.duration() < 10.0 / spec.gamma) {
        std::ostringstream os;
        os << "linearized laser: duration " << grid.duration() << " s is shorter than 10/gamma = "
           << 10.0 / spec.gamma << " s; low-frequency spectra will be poorly resolved";
        warn(os.str());
    }
    const RealTrace w1 = white_noise(grid, 0.25, stream(seed, LaserStream::in_phase));
    const RealTrace w2 = white_noise(grid, 0.25, stream(seed, LaserStream::quadrature));
    const RealTrace wd = laser_diffusion_component(spec, grid, seed);
    std::vector<cplx> z(grid.n());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = cplx(spec.r0 + w1[i], w2[i] + wd[i]);
    return FieldTrace(grid, cplx(spec.r0, 0.0), std::move(z));
}

RealTrace laser_diffusion_component(const LinearLaserSpec& spec, const TimeGrid& grid,
                                    const SeedStream& seed) {
    spec.validate();
    return wiener_increment_process(grid, 0.25 * spec.gamma * spec.gamma,
                                    stream(seed, LaserStream::diffusion));
}

double potential_value(const PotentialLaserSpec& spec, std::complex<double> amplitude) {
    const double p = std::norm(amplitude);
    return -0.25 * (spec.alpha - spec.gamma0) * p + 0.25 * spec.C * p * p;
}

FieldTrace nonlinear_laser(const PotentialLaserSpec& spec, const TimeGrid& grid,
                           std::complex<double> initial, const SeedStream& seed) {
    spec.validate();
    const double g = spec.alpha - spec.gamma0;
    const double a_ss = spec.steady_radius();
    const double r_init = std::abs(initial);
    const double stiffness =
        std::max(std::abs(g), spec.C * std::max(a_ss * a_ss, r_init * r_init));
    if (grid.dt() * stiffness > 0.1) {
        std::ostringstream os;
        os << "nonlinear laser: dt = " << grid.dt() << " s is too coarse; need dt <= "
           << 0.1 / stiffness << " s for relaxation rate " << stiffness << " 1/s";
        throw ConfigError(os.str());
    }
    std::vector<double> xr(grid.n()), xi(grid.n());
    seed.child(std::uint64_t{1}).fill_normal(xr);
    seed.child(std::uint64_t{2}).fill_normal(xi);
    const double ns = std::sqrt(spec.noise_psd * grid.dt());
    const double dt = grid.dt();
    const double limit = 1e3 * std::max({a_ss, r_init, 1.0});

    std::vector<cplx> z(grid.n());
    cplx a = initial;
    z[0] = a;
    for (std::size_t k = 1; k < z.size(); ++k) {
        const double p = std::norm(a);
        const cplx drift = (0.5 * g - spec.C * p) * a;
        a += drift * dt + cplx(ns * xr[k - 1], ns * xi[k - 1]);
        if (!(std::abs(a) <= limit)) {
            std::ostringstream os;
            os << "nonlinear laser: |a| exceeded " << limit << " at t = " << grid.time(k)
               << " s with dt = " << dt << " s";
            throw NumericalInstability(os.str(), dt);
        }
        z[k] = a;
    }
    const cplx carrier = r_init > 0.0 ? (a_ss / r_init) * initial : cplx(a_ss, 0.0);
    return FieldTrace(grid, carrier, std::move(z));
}

FieldTrace linearized_potential_laser(const PotentialLaserSpec& spec, const TimeGrid& grid,
                                      const SeedStream& seed) {
    spec.validate();
    if (!spec.above_threshold())
        throw ConfigError("linearized potential laser: needs alpha > gamma0");
    const double g = spec.alpha - spec.gamma0;
    if (grid.dt() * g > 0.1) {
        std::ostringstream os;
        os << "linearized potential laser: dt = " << grid.dt() << " s is too coarse; need dt <= "
           << 0.1 / g << " s";
        throw ConfigError(os.str());
    }
    const double a_ss = spec.steady_radius();
    std::vector<double> xr(grid.n()), xi(grid.n());
    seed.child(std::uint64_t{1}).fill_normal(xr);
    seed.child(std::uint64_t{2}).fill_normal(xi);
    const double ns = std::sqrt(spec.noise_psd * grid.dt());
    const double dt = grid.dt();

    std::vector<cplx> z(grid.n());
    double d1 = 0.0, d2 = 0.0;
    z[0] = cplx(a_ss, 0.0);
    for (std::size_t k = 1; k < z.size(); ++k) {
        d1 += -g * d1 * dt + ns * xr[k - 1];
        d2 += ns * xi[k - 1];
        z[k] = cplx(a_ss + d1, d2);
    }
    return FieldTrace(grid, cplx(a_ss, 0.0), std::move(z));
}

std::vector<double> unwrapped_phase(const FieldTrace& trace) {
    const auto s = trace.samples();
    std::vector<double> ph(s.size());
    double prev = std::arg(s[0]);
    ph[0] = prev;
    double offset = 0.0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double raw = std::arg(s[k]);
        const double jump = raw - prev;
        if (jump > std::numbers::pi)
            offset -= two_pi;
        else if (jump < -std::numbers::pi)
            offset += two_pi;
        prev = raw;
        ph[k] = raw + offset;
    }
    return ph;
}

PhaseDiffusionFit phase_diffusion_coefficient(std::span<const FieldTrace> ensemble) {
    require_ensemble(ensemble);
    std::vector<std::vector<double>> phases;
    phases.reserve(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        require_above_threshold(ensemble[i], i);
        phases.push_back(unwrapped_phase(ensemble[i]));
    }
    return fit_variance_growth(phases, ensemble[0].grid());
}

PhaseDiffusionFit relative_phase_diffusion(std::span<const FieldTrace> a,
                                           std::span<const FieldTrace> b) {
    if (a.size() != b.size())
        throw ShapeError("relative phase diffusion: ensembles differ in size");
    require_ensemble(a);
    require_ensemble(b);
    require_same_grid(a[0].grid(), b[0].grid(), "relative phase diffusion");
    std::vector<std::vector<double>> phases;
    phases.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        require_above_threshold(a[i], i);
        require_above_threshold(b[i], i);
        auto pa = unwrapped_phase(a[i]);
        const auto pb = unwrapped_phase(b[i]);
        for (std::size_t k = 0; k < pa.size(); ++k) pa[k] -= pb[k];
        phases.push_back(std::move(pa));
    }
    return fit_variance_growth(phases, a[0].grid());
}

}  // namespace lockbench
