#pragma once

#include <complex>
#include <span>

#include "lockbench/noise.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

/// Linearized high-above-threshold laser: mean flux amplitude r0 (sqrt(Hz))
/// and inverse photon lifetime gamma (rad/s). gamma = 0 is a coherent state.
struct LinearLaserSpec {
    double r0 = 1.0;
    double gamma = 0.0;

    void validate() const;
};

/// Van der Pol style laser in the potential
/// V(a) = -((alpha - gamma0)/4)|a|^2 + (C/4)|a|^4 with complex white Langevin
/// forcing of PSD noise_psd in each quadrature.
struct PotentialLaserSpec {
    double alpha = 2.6;
    double gamma0 = 1.0;
    double C = 0.8;
    double noise_psd = 0.0;

    void validate() const;
    bool above_threshold() const noexcept { return alpha > gamma0; }
    /// Radius of the potential minimum, sqrt((alpha - gamma0)/(2C)); 0 below
    /// threshold.
    double steady_radius() const noexcept;
};

/// Stream layout of linearized_laser: child 1 drives the in-phase white
/// noise, child 2 the quadrature white noise, child 3 the Wiener drive.
enum class LaserStream : std::uint64_t { in_phase = 1, quadrature = 2, diffusion = 3 };

/// r0 + dr1 + i dr2 with dr1 white (PSD 1/4) and dr2 white (PSD 1/4) plus a
/// Wiener process of drive PSD gamma^2/4, so S2 = (W^2 + gamma^2)/(4 W^2).
/// Warns when the run is shorter than 10/gamma.
FieldTrace linearized_laser(const LinearLaserSpec& spec, const TimeGrid& grid,
                            const SeedStream& seed);

/// The Wiener part of the quadrature of linearized_laser(spec, grid, seed).
RealTrace laser_diffusion_component(const LinearLaserSpec& spec, const TimeGrid& grid,
                                    const SeedStream& seed);

double potential_value(const PotentialLaserSpec& spec, std::complex<double> amplitude);

/// Euler-Maruyama integration of
///   da/dt = ((alpha - gamma0)/2) a - C |a|^2 a + xi(t),
/// which is the steepest descent of V, so |a|^2 settles at (alpha-gamma0)/(2C).
/// Child 1 of `seed` drives Re(xi), child 2 drives Im(xi).
///
/// Throws ConfigError when dt is too coarse for the relaxation rates and
/// NumericalInstability when |a| runs away.
FieldTrace nonlinear_laser(const PotentialLaserSpec& spec, const TimeGrid& grid,
                           std::complex<double> initial, const SeedStream& seed);

/// The same forcing as nonlinear_laser(spec, grid, a_ss, seed) applied to the
/// model linearized about the real steady state a_ss: the amplitude
/// fluctuation relaxes at rate (alpha - gamma0) and the quadrature diffuses
/// freely.
FieldTrace linearized_potential_laser(const PotentialLaserSpec& spec, const TimeGrid& grid,
                                      const SeedStream& seed);

struct PhaseDiffusionFit {
    double slope = 0.0;      // rad^2/s
    double intercept = 0.0;  // rad^2
    double r_squared = 0.0;
};

/// Nearest-branch unwrapped phase of a trace.
std::vector<double> unwrapped_phase(const FieldTrace& trace);

/// Linear fit of the ensemble variance of phi(t) - phi(0) against t.
/// Requires >= 100 members on one grid, each with mean |a| above three
/// standard deviations of |a| (DiagnosticError otherwise).
PhaseDiffusionFit phase_diffusion_coefficient(std::span<const FieldTrace> ensemble);

/// Same fit for the relative phase arg(a_k) - arg(b_k) of paired members.
PhaseDiffusionFit relative_phase_diffusion(std::span<const FieldTrace> a,
                                           std::span<const FieldTrace> b);

}  // namespace lockbench
