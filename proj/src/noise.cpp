#include "lockbench/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lockbench/error.hpp"

namespace lockbench {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fold(std::uint64_t key, std::uint64_t id) noexcept {
    return mix64(key ^ mix64(id + kGolden));
}

void require_psd(double psd, const char* what) {
    if (!(psd >= 0.0) || !std::isfinite(psd)) {
        std::ostringstream os;
        os << what << ": PSD must be finite and >= 0, got " << psd;
        throw ConfigError(os.str());
    }
}

}  // namespace

SeedStream::SeedStream(std::uint64_t master_seed)
    : master_(master_seed), key_(mix64(master_seed ^ 0x6C6F636B62656E63ULL)) {}

SeedStream SeedStream::child(std::uint64_t id) const {
    SeedStream s = *this;
    s.path_.push_back(id);
    s.key_ = fold(key_, id);
    return s;
}

SeedStream SeedStream::child(std::string_view name) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return child(h);
}

std::uint64_t SeedStream::bits(std::uint64_t k) const noexcept {
    return mix64(key_ + (k + 1) * kGolden);
}

double SeedStream::uniform(std::uint64_t k) const noexcept {
    return static_cast<double>(bits(k) >> 11) * 0x1.0p-53;
}

void SeedStream::fill_normal(std::span<double> out) const {
    const std::size_t n = out.size();
    for (std::size_t j = 0; 2 * j < n; ++j) {
        const double u1 = (static_cast<double>(bits(2 * j) >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(bits(2 * j + 1) >> 11) * 0x1.0p-53;
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        out[2 * j] = rad * std::cos(ang);
        if (2 * j + 1 < n) out[2 * j + 1] = rad * std::sin(ang);
    }
}

RealTrace white_noise(const TimeGrid& grid, double psd, const SeedStream& seed) {
    require_psd(psd, "white_noise");
    std::vector<double> x(grid.n(), 0.0);
    if (psd > 0.0) {
        seed.fill_normal(x);
        const double s = std::sqrt(psd / grid.dt());
        for (double& v : x) v *= s;
    }
    return RealTrace(grid, std::move(x));
}

RealTrace wiener_increment_process(const TimeGrid& grid, double drive_psd,
                                   const SeedStream& seed) {
    require_psd(drive_psd, "wiener_increment_process");
    std::vector<double> x(grid.n(), 0.0);
    if (drive_psd > 0.0) {
        seed.fill_normal(x);
        const double s = std::sqrt(drive_psd * grid.dt());
        // x[0] = 0; x[k] = sum of k increments
        double acc = 0.0;
        double prev = x[0];
        x[0] = 0.0;
        for (std::size_t k = 1; k < x.size(); ++k) {
            acc += s * prev;
            prev = x[k];
            x[k] = acc;
        }
    }
    return RealTrace(grid, std::move(x));
}

FieldTrace vacuum_field(const TimeGrid& grid, const SeedStream& seed) {
    std::vector<double> re(grid.n()), im(grid.n());
    seed.child(std::uint64_t{0}).fill_normal(re);
    seed.child(std::uint64_t{1}).fill_normal(im);
    const double s = std::sqrt(0.25 / grid.dt());
    std::vector<cplx> z(grid.n());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = cplx(s * re[i], s * im[i]);
    return FieldTrace(grid, cplx(0.0, 0.0), std::move(z));
}

}  // namespace lockbench
