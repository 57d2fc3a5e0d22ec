#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lockbench/trace.hpp"

namespace lockbench {

/// Counter-based random stream addressed by (master seed, integer path).
///
/// Sample k of a stream is a pure function of the stream key and k, so
/// adding a new child never shifts the numbers seen by existing children.
/// Gaussian deviates use Box-Muller on counter pairs (2j, 2j+1).
class SeedStream {
  public:
    explicit SeedStream(std::uint64_t master_seed);

    std::uint64_t master_seed() const noexcept { return master_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }
    std::uint64_t key() const noexcept { return key_; }

    SeedStream child(std::uint64_t id) const;
    /// Child addressed by a name; the id is the FNV-1a hash of `name`.
    SeedStream child(std::string_view name) const;

    /// 64 random bits for counter k.
    std::uint64_t bits(std::uint64_t k) const noexcept;
    /// Uniform double in [0, 1) for counter k.
    double uniform(std::uint64_t k) const noexcept;
    /// Standard normal deviates 0..out.size()-1 of this stream.
    void fill_normal(std::span<double> out) const;

  private:
    std::uint64_t master_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
};

/// i.i.d. N(0, psd/dt) samples: flat double-sided PSD `psd` up to Nyquist.
RealTrace white_noise(const TimeGrid& grid, double psd, const SeedStream& seed);

/// Running sum of white increments of variance drive_psd*dt, starting at 0.
/// PSD is drive_psd/Omega^2 and Var(x(t)) = drive_psd*t.
RealTrace wiener_increment_process(const TimeGrid& grid, double drive_psd,
                                   const SeedStream& seed);

/// Zero-mean complex field, each quadrature white at PSD 1/4. Quadratures
/// come from children 0 (real) and 1 (imaginary) of `seed`.
FieldTrace vacuum_field(const TimeGrid& grid, const SeedStream& seed);

}  // namespace lockbench
