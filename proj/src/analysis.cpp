#include "lockbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lockbench/detection.hpp"
#include "lockbench/error.hpp"

namespace lockbench {

namespace {

void require_pairs(std::span<const double> x, std::span<const double> y, std::size_t min,
                   const char* what) {
    if (x.size() != y.size()) throw ShapeError(std::string(what) + ": x and y differ in length");
    if (x.size() < min) throw DomainError(std::string(what) + ": too few points");
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 2, "fit_line");
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit_line: x has no spread");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

LinearFit fit_line_through_origin(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 2, "fit_line_through_origin");
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) throw DomainError("fit_line_through_origin: x is all zero");
    LinearFit f;
    f.slope = sxy / sxx;
    const double my = mean_of(y);
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        res += (y[i] - f.slope * x[i]) * (y[i] - f.slope * x[i]);
        tot += (y[i] - my) * (y[i] - my);
    }
    f.r_squared = tot > 0.0 ? 1.0 - res / tot : 1.0;
    return f;
}

LinearFit loglog_slope(std::span<const double> omega, std::span<const double> value, double lo,
                       double hi) {
    require_pairs(omega, value, 0, "loglog_slope");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (omega[i] >= lo && omega[i] <= hi && omega[i] > 0.0 && value[i] > 0.0) {
            lx.push_back(std::log(omega[i]));
            ly.push_back(std::log(value[i]));
        }
    }
    if (lx.size() < 2) throw DomainError("loglog_slope: fewer than two positive bins in band");
    return fit_line(lx, ly);
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
    require_pairs(x, y, 3, "fit_quadratic");
    // Normal equations on centred x.
    const double mx = mean_of(x);
    double s[5] = {0, 0, 0, 0, 0}, t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] - mx;
        double p = 1.0;
        for (int k = 0; k < 5; ++k) {
            s[k] += p;
            if (k < 3) t[k] += p * y[i];
            p *= u;
        }
    }
    // [s4 s3 s2; s3 s2 s1; s2 s1 s0] [a b c]' = [t2 t1 t0]'
    double m[3][4] = {{s[4], s[3], s[2], t[2]}, {s[3], s[2], s[1], t[1]}, {s[2], s[1], s[0], t[0]}};
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
        if (m[c][c] == 0.0) throw DomainError("fit_quadratic: singular system");
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
        }
    }
    const double a = m[0][3] / m[0][0], b = m[1][3] / m[1][1], c = m[2][3] / m[2][2];
    // Undo the centring.
    return QuadraticFit{a, b - 2.0 * a * mx, a * mx * mx - b * mx + c};
}

SqrtGrowthFit fit_sqrt_growth(std::span<const double> t, std::span<const double> value) {
    std::vector<double> st(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) st[i] = std::sqrt(t[i]);
    const LinearFit f = fit_line_through_origin(st, value);
    return SqrtGrowthFit{f.slope, f.r_squared};
}

std::function<double(double)> analytic_curve(CurveKind kind, const CurveParams& p) {
    switch (kind) {
        case CurveKind::coherent_quadrature:
            return [](double) { return 0.25; };
        case CurveKind::laser_quad2: {
            if (!(p.gamma >= 0.0)) throw ConfigError("laser_quad2: gamma must be >= 0");
            const double g2 = p.gamma * p.gamma;
            return [g2](double w) {
                if (w == 0.0) return g2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.25;
                return (w * w + g2) / (4.0 * w * w);
            };
        }
        case CurveKind::locked_beat: {
            if (!(p.r > 0.0) || !(p.a0 > 0.0))
                throw ConfigError("locked_beat: r and a0 must be > 0");
            const double ta = p.t * p.a0;
            double level = 2.0 * (ta / p.r) * (ta / p.r);
            if (p.b0 > 0.0) level += 4.0 * ta * ta * ta * ta / (p.b0 * p.b0);
            return [level](double) { return level; };
        }
        case CurveKind::delayed_homodyne_spectrum: {
            if (!(p.T > 0.0) || !(p.tau > 0.0))
                throw ConfigError("delayed_homodyne_spectrum: tau and T must be > 0");
            const double r0 = p.r0, g = p.gamma, tau = p.tau, T = p.T;
            return [r0, g, tau, T](double w) {
                if (w == 0.0) return r0 * r0 * g * g * tau * tau * T * T;
                const double k = std::sin(0.5 * w * tau) * std::sin(0.5 * w * T) / (0.5 * w);
                return 4.0 * r0 * r0 * ((w * w + g * g) / (w * w)) * k * k;
            };
        }
    }
    throw ConfigError("analytic_curve: unknown kind");
}

CurveKind parse_curve_kind(const std::string& name) {
    if (name == "coherent_quadrature") return CurveKind::coherent_quadrature;
    if (name == "laser_quad2") return CurveKind::laser_quad2;
    if (name == "locked_beat") return CurveKind::locked_beat;
    if (name == "delayed_homodyne_spectrum") return CurveKind::delayed_homodyne_spectrum;
    throw ConfigError("unknown curve kind '" + name +
                      "' (expected coherent_quadrature, laser_quad2, locked_beat or "
                      "delayed_homodyne_spectrum)");
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::coherent_quadrature: return "coherent_quadrature";
        case CurveKind::laser_quad2: return "laser_quad2";
        case CurveKind::locked_beat: return "locked_beat";
        case CurveKind::delayed_homodyne_spectrum: return "delayed_homodyne_spectrum";
    }
    return "?";
}

double delayed_homodyne_variance_printed(double r0, double gamma, double tau, double T,
                                         int sign) {
    const double s = sign >= 0 ? 1.0 : -1.0;
    return r0 * r0 * T * (2.0 + s * T * tau * gamma * gamma * (1.0 - T / (6.0 * tau)));
}

double delayed_homodyne_variance_exact(double r0, double gamma, double tau, double T) {
    return r0 * r0 * T * (2.0 + T * tau * gamma * gamma * (1.0 - T / (3.0 * tau)));
}

ComparisonReport compare_psd(const SpectrumEstimate& est, const std::function<double(double)>& ref,
                             double lo, double hi, double tolerance, std::string name,
                             std::size_t groups) {
    if (!(lo < hi)) throw DomainError("compare_psd: empty band");
    if (est.omega.empty() || lo < est.omega.front() || hi > est.omega.back()) {
        std::ostringstream os;
        os << "compare_psd: band [" << lo << ", " << hi << "] rad/s is outside the estimate support";
        throw DomainError(os.str());
    }
    std::vector<std::size_t> bins;
    for (std::size_t k = 0; k < est.omega.size(); ++k)
        if (est.omega[k] >= lo && est.omega[k] <= hi) bins.push_back(k);
    if (bins.size() < 10) {
        std::ostringstream os;
        os << "compare_psd: only " << bins.size() << " bins in [" << lo << ", " << hi
           << "] rad/s; need at least 10";
        throw DomainError(os.str());
    }
    std::vector<double> e(bins.size()), r(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
        e[i] = est.psd[bins[i]];
        r[i] = ref(est.omega[bins[i]]);
        if (!(r[i] > 0.0) || !std::isfinite(r[i])) {
            std::ostringstream os;
            os << "compare_psd: reference is not finite and positive at " << est.omega[bins[i]]
               << " rad/s";
            throw DomainError(os.str());
        }
    }
    std::vector<double> rel;
    if (groups == 0) {
        for (std::size_t i = 0; i < e.size(); ++i) rel.push_back(std::abs(e[i] - r[i]) / r[i]);
    } else {
        const double l0 = std::log(est.omega[bins.front()]);
        const double l1 = std::log(est.omega[bins.back()]);
        if (!(est.omega[bins.front()] > 0.0))
            throw DomainError("compare_psd: grouped comparison needs a band above DC");
        std::vector<double> se(groups, 0.0), sr(groups, 0.0);
        std::vector<std::size_t> cnt(groups, 0);
        for (std::size_t i = 0; i < bins.size(); ++i) {
            const double u = (std::log(est.omega[bins[i]]) - l0) / (l1 - l0);
            const std::size_t g =
                std::min(groups - 1, static_cast<std::size_t>(u * static_cast<double>(groups)));
            se[g] += e[i];
            sr[g] += r[i];
            ++cnt[g];
        }
        for (std::size_t g = 0; g < groups; ++g)
            if (cnt[g] > 0) rel.push_back(std::abs(se[g] - sr[g]) / sr[g]);
    }
    ComparisonReport rep;
    rep.name = std::move(name);
    rep.band_lo = lo;
    rep.band_hi = hi;
    rep.tolerance = tolerance;
    rep.n_bins = bins.size();
    rep.groups = groups;
    rep.max_rel_error = *std::max_element(rel.begin(), rel.end());
    rep.mean_rel_error = mean_of(rel);
    rep.pass = rep.max_rel_error <= tolerance;
    return rep;
}

CoherenceReport coherence_metric(std::span<const FieldTrace> f, std::span<const FieldTrace> f2,
                                 double averaging_T, double threshold, double t_begin,
                                 double t_end) {
    if (f.size() != f2.size() || f.empty())
        throw ShapeError("coherence_metric: need equal, non-empty sets of fields");
    const TimeGrid& g = f[0].grid();
    const std::size_t kb = g.samples_in(averaging_T, "coherence averaging_T");
    if (kb == 0) throw ConfigError("coherence_metric: averaging_T must be at least one sample");
    const double stop = t_end < 0.0 ? g.duration() : t_end;
    std::complex<double> cross = 0.0;
    double p1 = 0.0, p2 = 0.0, sq = 0.0;
    std::size_t blocks = 0;
    for (std::size_t m = 0; m < f.size(); ++m) {
        require_same_grid(g, f[m].grid(), "coherence_metric");
        require_same_grid(g, f2[m].grid(), "coherence_metric");
        const double r1 = f[m].r0(), r2 = f2[m].r0();
        if (!(r1 > 0.0) || !(r2 > 0.0))
            throw DomainError("coherence_metric: field with zero mean amplitude");
        const cplx u1 = std::conj(f[m].mean()) / r1, u2 = std::conj(f2[m].mean()) / r2;
        const auto s1 = f[m].samples(), s2 = f2[m].samples();
        for (std::size_t b = 0; (b + 1) * kb <= g.n(); ++b) {
            const double ts = g.time(b * kb);
            if (ts < t_begin || ts >= stop) continue;
            cplx F1 = 0.0, F2 = 0.0;
            for (std::size_t i = b * kb; i < (b + 1) * kb; ++i) {
                F1 += s1[i];
                F2 += s2[i];
            }
            F1 /= static_cast<double>(kb);
            F2 /= static_cast<double>(kb);
            cross += F1 * std::conj(F2);
            p1 += std::norm(F1);
            p2 += std::norm(F2);
            const double q1 = (u1 * (F1 - f[m].mean())).imag() / r1;
            const double q2 = (u2 * (F2 - f2[m].mean())).imag() / r2;
            sq += (q1 - q2) * (q1 - q2);
            ++blocks;
        }
    }
    if (blocks == 0) throw DomainError("coherence_metric: no complete block in the time range");
    CoherenceReport rep;
    rep.g1_modulus = std::abs(cross) / std::sqrt(p1 * p2);
    rep.condition_ratio = std::sqrt(sq / static_cast<double>(blocks));
    rep.band_lo = 0.0;
    rep.band_hi = std::numbers::pi / averaging_T;
    rep.threshold = threshold;
    rep.pass = rep.condition_ratio < threshold;
    rep.n_blocks = blocks;
    return rep;
}

CoherenceReport coherence_metric(const FieldTrace& f, const FieldTrace& f2, double averaging_T,
                                 double threshold) {
    return coherence_metric(std::span<const FieldTrace>(&f, 1), std::span<const FieldTrace>(&f2, 1),
                            averaging_T, threshold);
}

CoherenceMargin coherence_margin(double r0, double difference_psd, double averaging_T) {
    if (!(r0 > 0.0) || !(difference_psd >= 0.0) || !(averaging_T > 0.0))
        throw DomainError("coherence_margin: need r0 > 0, psd >= 0, averaging_T > 0");
    CoherenceMargin m;
    m.condition_ratio = std::sqrt(difference_psd / averaging_T) / r0;
    m.orders = -std::log10(m.condition_ratio);
    return m;
}

namespace {

struct Moments {
    double n = 0, s = 0, s2 = 0, s3 = 0, s4 = 0;
    void add(double x) {
        n += 1;
        s += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    double mean() const { return s / n; }
    double var() const { return (s2 - s * s / n) / (n - 1); }
    Estimate mean_est() const { return {mean(), std::sqrt(var() / n)}; }
    Estimate var_est(double shift = 0.0) const {
        const double m = mean();
        const double c2 = s2 / n - m * m;
        const double c4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m * m * m * m;
        return {var() - shift, std::sqrt(std::max(0.0, c4 - c2 * c2) / n)};
    }
};

}  // namespace

TableStats ensemble_table_stats(std::span<const FieldTrace> runs, double T,
                                const TableOptions& options, const SeedStream& seed) {
    if (runs.empty()) throw DiagnosticError("ensemble_table_stats: no runs");
    Moments a1, a2, num;
    const double sqT = std::sqrt(T);
    std::size_t per_mode = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const FieldTrace& f = runs[i];
        const TimeGrid& g = f.grid();
        per_mode = g.samples_in(T, "mode duration T");
        if (per_mode == 0) throw ConfigError("ensemble_table_stats: T must be at least one sample");
        ModeSampleSeries q1, q2;
        if (options.lo_ratio > 0.0) {
            const double L = options.lo_ratio * std::max(f.r0(), 1.0);
            const FieldTrace vac = vacuum_field(g, seed.child(static_cast<std::uint64_t>(i)));
            std::vector<cplx> l1(g.n()), l2(g.n());
            for (std::size_t k = 0; k < g.n(); ++k) {
                l1[k] = cplx(L, 0.0) + vac[k];
                l2[k] = cplx(0.0, 1.0) * l1[k];
            }
            const FieldTrace lo1(g, cplx(L, 0.0), std::move(l1));
            const FieldTrace lo2(g, cplx(0.0, L), std::move(l2));
            q1 = mode_integrate(balanced_homodyne(f, lo1), T);
            q2 = mode_integrate(balanced_homodyne(f, lo2), T);
            for (double& v : q1.values) v /= 2.0 * L;
            for (double& v : q2.values) v /= 2.0 * L;
        } else {
            std::vector<double> re(g.n()), im(g.n());
            for (std::size_t k = 0; k < g.n(); ++k) {
                re[k] = f[k].real();
                im[k] = f[k].imag();
            }
            q1 = mode_integrate(RealTrace(g, std::move(re)), T);
            q2 = mode_integrate(RealTrace(g, std::move(im)), T);
        }
        const ModeSampleSeries counts = mode_integrate(photocurrent(f), T);
        const double floor = 0.5 * static_cast<double>(per_mode);
        for (std::size_t m = 0; m < counts.values.size(); ++m) {
            a1.add(q1.values[m] / sqT);
            a2.add(q2.values[m] / sqT);
            num.add(counts.values[m] - floor);
        }
    }
    if (num.n < 1000) {
        std::ostringstream os;
        os << "ensemble_table_stats: " << num.n << " modes; need at least 1000";
        throw DiagnosticError(os.str());
    }
    TableStats t;
    t.a1_mean = a1.mean_est();
    t.a2_mean = a2.mean_est();
    t.a1_var = a1.var_est();
    t.a2_var = a2.var_est();
    t.n_mean = num.mean_est();
    t.n_var = num.var_est(0.25 * static_cast<double>(per_mode));
    t.modes = static_cast<std::size_t>(num.n);
    return t;
}

StationarityReport stationarity_check(std::span<const double> x, double tolerance) {
    if (x.size() < 4) throw DomainError("stationarity_check: need at least 4 samples");
    const std::size_t h = x.size() / 2;
    auto var = [](std::span<const double> v) {
        double s = 0.0, s2 = 0.0;
        for (double a : v) {
            s += a;
            s2 += a * a;
        }
        const double n = static_cast<double>(v.size());
        return (s2 - s * s / n) / (n - 1.0);
    };
    StationarityReport r;
    r.first_var = var(x.subspan(0, h));
    r.second_var = var(x.subspan(h, h));
    r.ratio = r.second_var / r.first_var;
    r.pass = std::abs(r.ratio - 1.0) <= tolerance;
    return r;
}

}  // namespace lockbench
