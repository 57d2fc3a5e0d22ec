#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <sstream>

#include "lockbench/control.hpp"
#include "lockbench/detection.hpp"
#include "lockbench/laser.hpp"
#include "lockbench/noise.hpp"
#include "lockbench/optics.hpp"
#include "lockbench/scenario.hpp"
#include "schema.hpp"

namespace lockbench {

bool RunResult::all_pass() const {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

const AnalysisReport* RunResult::report(const std::string& name) const {
    for (const auto& r : reports)
        if (r.name == name) return &r;
    return nullptr;
}

const NamedSpectrum* RunResult::spectrum(const std::string& name) const {
    for (const auto& s : spectra)
        if (s.name == name) return &s;
    return nullptr;
}

double AnalysisReport::value(const std::string& key) const {
    for (const auto& [k, v] : values)
        if (k == key) return v;
    throw ConfigError("report " + name + " has no value '" + key + "'");
}

namespace {

struct Signal {
    std::variant<RealTrace, FieldTrace> data;
    std::string unit;
};

class Runner {
  public:
    Runner(const ScenarioConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), grid_(cfg.grid()), root_(seed), state_(cfg.sections.size(), 0) {
        for (std::size_t i = 0; i < cfg.sections.size(); ++i)
            for (const auto& o : schema::outputs_of(cfg.sections[i])) producer_[o.name] = i;
    }

    void evaluate_all() {
        for (std::size_t i = 0; i < cfg_.sections.size(); ++i) ensure(i);
    }

    const FieldTrace& field(const std::string& ref) {
        const Signal& s = lookup(ref);
        return std::get<FieldTrace>(s.data);
    }

    RealTrace real(const std::string& ref) {
        const auto colon = ref.find(':');
        if (colon == std::string::npos) return std::get<RealTrace>(lookup(ref).data);
        const FieldTrace& f = field(ref.substr(0, colon));
        return ref.substr(colon + 1) == "quad" ? f.quadrature() : f.in_phase();
    }

    std::string unit(const std::string& ref) {
        const auto colon = ref.find(':');
        return lookup(colon == std::string::npos ? ref : ref.substr(0, colon)).unit;
    }

    const Signal& lookup(const std::string& name) {
        auto it = signals_.find(name);
        if (it != signals_.end()) return it->second;
        auto p = producer_.find(name);
        if (p == producer_.end()) throw ConfigError("unknown signal '" + name + "'");
        ensure(p->second);
        return signals_.at(name);
    }

    std::vector<NamedSpectrum> spectra;
    std::vector<AnalysisReport> reports;

  private:
    void ensure(std::size_t i) {
        if (state_[i] == 2) return;
        if (state_[i] == 1) throw ConfigError(cfg_.sections[i].label() + ": wiring cycle");
        state_[i] = 1;
        const Section& s = cfg_.sections[i];
        try {
            evaluate(s);
        } catch (const RunError&) {
            throw;
        } catch (const std::exception& e) {
            std::throw_with_nested(RunError(s.label(), e.what()));
        }
        state_[i] = 2;
    }

    SeedStream seed_for(const Section& s) const { return root_.child(s.kind).child(s.name); }

    void put(const std::string& name, FieldTrace f) {
        signals_.insert_or_assign(name, Signal{std::move(f), "Hz^0.5"});
    }
    void put(const std::string& name, RealTrace r, std::string unit) {
        signals_.insert_or_assign(name, Signal{std::move(r), std::move(unit)});
    }

    void evaluate(const Section& s) {
        const std::string& n = s.name;
        if (s.kind == "laser") {
            if (s.text("model") == "linear") {
                put(n, linearized_laser(LinearLaserSpec{s.number("r0"), s.number("gamma")}, grid_,
                                        seed_for(s)));
            } else {
                PotentialLaserSpec spec{s.number("alpha"), s.number("gamma0"), s.number("C"),
                                        s.number("noise_psd")};
                spec.validate();
                const double rad =
                    s.has("initial_radius") ? s.number("initial_radius") : spec.steady_radius();
                put(n, nonlinear_laser(spec, grid_, std::polar(rad, s.number("initial_phase")),
                                       seed_for(s)));
            }
        } else if (s.kind == "vacuum") {
            put(n, vacuum_field(grid_, seed_for(s)));
        } else if (s.kind == "beam_splitter") {
            PortPair p = beam_splitter(field(s.text("in_a")), field(s.text("in_b")),
                                       BeamSplitterSpec{s.number("theta")});
            put(n + ".a", std::move(p.out_a));
            put(n + ".b", std::move(p.out_b));
        } else if (s.kind == "phase_shift") {
            const FieldTrace& in = field(s.text("in"));
            const bool lin = s.boolean("linearized");
            if (s.has("phi_signal")) {
                const RealTrace phi = real(s.text("phi_signal"));
                put(n, lin ? phase_shift_linearized(in, phi) : phase_shift(in, phi));
            } else {
                const double phi = s.number("phi");
                put(n, lin ? phase_shift_linearized(in, phi) : phase_shift(in, phi));
            }
        } else if (s.kind == "delay") {
            put(n, delay(field(s.text("in")), s.number("tau"), seed_for(s)));
        } else if (s.kind == "time_gate") {
            put(n, time_gate(field(s.text("in")), s.windows("windows"), seed_for(s)));
        } else if (s.kind == "feedforward") {
            const FieldTrace& slave = field(s.text("slave"));
            const FieldTrace& arm = field(s.text("master_arm"));
            FeedforwardSpec spec;
            spec.theta_tap = s.number("theta_tap");
            const double b0 = s.has("master_amplitude") ? s.number("master_amplitude")
                                                        : std::numbers::sqrt2 * arm.r0();
            spec.gain = gain(s, slave.r0(), b0);
            if (s.has("actuator_range")) spec.actuator_range = s.number("actuator_range");
            LockResult r = feedforward_lock(slave, arm, spec, seed_for(s));
            if (s.has("unlock_at")) put(n + ".coast", unlock_and_coast(r, s.number("unlock_at")));
            put(n, std::move(r.output));
            put(n + ".c", std::move(r.slave_port));
            put(n + ".error", std::move(r.error).as_real(), "Hz");
            put(n + ".correction", std::move(r.correction), "rad");
        } else if (s.kind == "dual_lock") {
            const FieldTrace& a = field(s.text("slave_a"));
            const FieldTrace& b = field(s.text("slave_b"));
            const FieldTrace& m = field(s.text("master"));
            FeedforwardSpec spec;
            spec.theta_tap = s.number("theta_tap");
            spec.gain = gain(s, a.r0(), m.r0());
            if (s.has("actuator_range")) spec.actuator_range = s.number("actuator_range");
            DualLockResult r = dual_lock(a, b, m, spec, seed_for(s));
            if (s.has("unlock_at")) {
                const double t = s.number("unlock_at");
                FieldTrace c1 = unlock_and_coast(r.first, t);
                FieldTrace c2 = unlock_and_coast(r.second, t);
                put(n + ".coast_beat", quadrature_beat(c1, c2).as_real(), "Hz");
                put(n + ".coast", std::move(c1));
                put(n + ".coast2", std::move(c2));
            }
            put(n + ".f", std::move(r.first.output));
            put(n + ".f2", std::move(r.second.output));
            put(n + ".k", std::move(r.master_arms.out_a));
            put(n + ".k2", std::move(r.master_arms.out_b));
            put(n + ".beat", r.beat.as_real(), "Hz");
            put(n + ".error", r.first.error.as_real(), "Hz");
            put(n + ".error2", r.second.error.as_real(), "Hz");
            put(n + ".correction", std::move(r.first.correction), "rad");
            put(n + ".correction2", std::move(r.second.correction), "rad");
        } else if (s.kind == "feedback") {
            const Section* laser = cfg_.find("laser", s.text("slave"));
            const LinearLaserSpec spec{laser->number("r0"), laser->number("gamma")};
            FeedbackSpec fb;
            fb.loop_gain = s.number("loop_gain");
            fb.loop_delay = s.number("loop_delay");
            fb.filter_bandwidth = s.number("filter_bandwidth");
            fb.theta_tap = s.number("theta_tap");
            fb.divergence_factor = s.number("divergence_factor");
            FeedbackResult r = feedback_lock(spec, field(s.text("master_arm")), fb, seed_for(s));
            put(n, std::move(r.lock.output));
            put(n + ".error", r.lock.error.as_real(), "Hz");
            put(n + ".correction", std::move(r.lock.correction), "rad");
            put(n + ".frequency", std::move(r.frequency_correction), "rad/s");
        } else if (s.kind == "homodyne") {
            const std::string mode = s.text("mode");
            const FieldTrace& sig = field(s.text("sig"));
            if (mode == "photocurrent") {
                put(n, photocurrent(sig).as_real(), "Hz");
            } else if (mode == "error") {
                put(n, error_signal(sig, field(s.text("lo"))).as_real(), "Hz");
            } else {
                put(n, balanced_homodyne(sig, field(s.text("lo"))).as_real(), "Hz");
            }
        } else if (s.kind == "analysis") {
            analyse(s);
        }
    }

    double gain(const Section& s, double a0, double b0) const {
        const double g = s.text("gain") == "nominal" ? nominal_gain(s.number("theta_tap"), a0, b0)
                                                     : s.number("gain");
        return g * (1.0 + s.number("epsilon"));
    }

    SpectrumEstimate estimate(const Section& s) {
        const RealTrace x = real(s.text("signal"));
        const auto seg = static_cast<std::size_t>(s.integer("segment"));
        const double ov = s.number("overlap");
        if (s.boolean("increments")) return increment_psd(x, seg, ov);
        return welch_psd(x, seg, ov, s.text("detrend") == "mean" ? Detrend::mean : Detrend::none);
    }

    static std::string psd_unit(const std::string& u) {
        if (u == "Hz^0.5") return "1";
        if (u == "Hz") return "Hz";
        if (u == "rad") return "rad^2/Hz";
        if (u == "rad/s") return "rad^2 Hz";
        return u + "^2/Hz";
    }

    void analyse(const Section& s) {
        const std::string kind = s.text("kind");
        AnalysisReport rep;
        rep.name = s.name;
        rep.kind = kind;
        if (kind == "psd" || kind == "compare" || kind == "flatness") {
            SpectrumEstimate est = estimate(s);
            rep.values.emplace_back("n_segments", static_cast<double>(est.n_segments));
            rep.values.emplace_back("resolution", est.resolution);
            rep.notes.emplace_back("signal", s.text("signal"));
            rep.notes.emplace_back("window", est.window);
            if (kind == "compare") {
                CurveParams p;
                p.gamma = s.number("gamma");
                p.t = s.number("t");
                p.r = s.number("r");
                p.a0 = s.number("a0");
                p.b0 = s.number("b0");
                p.r0 = s.number("r0");
                p.tau = s.number("tau");
                p.T = s.number("T");
                const auto curve = analytic_curve(parse_curve_kind(s.text("curve")), p);
                const double scale = s.number("scale");
                const auto [lo, hi] = s.band("band");
                const ComparisonReport c =
                    compare_psd(est, [&](double w) { return scale * curve(w); }, lo, hi,
                                s.number("tolerance"), s.name,
                                static_cast<std::size_t>(s.integer("groups")));
                rep.pass = c.pass;
                rep.values.emplace_back("band_lo", c.band_lo);
                rep.values.emplace_back("band_hi", c.band_hi);
                rep.values.emplace_back("max_rel_error", c.max_rel_error);
                rep.values.emplace_back("mean_rel_error", c.mean_rel_error);
                rep.values.emplace_back("tolerance", c.tolerance);
                rep.values.emplace_back("n_bins", static_cast<double>(c.n_bins));
                rep.values.emplace_back("groups", static_cast<double>(c.groups));
                rep.notes.emplace_back("curve", s.text("curve"));
            } else if (kind == "flatness") {
                const auto [l0, l1] = s.band("low_band");
                const auto [h0, h1] = s.band("high_band");
                const double low = band_average(est, l0, l1);
                const double high = band_average(est, h0, h1);
                const double ratio = low / high;
                rep.pass = ratio >= s.number("min_ratio") && ratio <= s.number("max_ratio");
                rep.values.emplace_back("low_level", low);
                rep.values.emplace_back("high_level", high);
                rep.values.emplace_back("ratio", ratio);
                rep.values.emplace_back("min_ratio", s.number("min_ratio"));
                rep.values.emplace_back("max_ratio", s.number("max_ratio"));
            }
            spectra.push_back(NamedSpectrum{s.name, psd_unit(unit(s.text("signal"))), std::move(est)});
        } else if (kind == "coherence") {
            const FieldTrace& f = field(s.text("f"));
            const FieldTrace& f2 = field(s.text("f2"));
            const CoherenceReport c = coherence_metric(
                std::span<const FieldTrace>(&f, 1), std::span<const FieldTrace>(&f2, 1),
                s.number("averaging_T"), s.number("threshold"), s.number("t_begin"), s.number("t_end"));
            rep.pass = c.pass;
            rep.values.emplace_back("g1_modulus", c.g1_modulus);
            rep.values.emplace_back("condition_ratio", c.condition_ratio);
            rep.values.emplace_back("band_lo", c.band_lo);
            rep.values.emplace_back("band_hi", c.band_hi);
            rep.values.emplace_back("threshold", c.threshold);
            rep.values.emplace_back("n_blocks", static_cast<double>(c.n_blocks));
        } else if (kind == "stationarity") {
            const RealTrace x = real(s.text("signal"));
            const std::size_t k0 = grid_.samples_in(s.number("t_begin"), "t_begin");
            const StationarityReport st =
                stationarity_check(x.samples().subspan(k0), s.number("tolerance"));
            rep.pass = st.pass;
            rep.values.emplace_back("first_var", st.first_var);
            rep.values.emplace_back("second_var", st.second_var);
            rep.values.emplace_back("ratio", st.ratio);
            rep.values.emplace_back("tolerance", s.number("tolerance"));
        } else if (kind == "phase_msd") {
            phase_msd(s, rep);
        }
        reports.push_back(std::move(rep));
    }

    // Mean squared increment of the relative phase against lag; the slope is
    // the relative phase-diffusion rate.
    void phase_msd(const Section& s, AnalysisReport& rep) {
        const auto p1 = unwrapped_phase(field(s.text("f")));
        const auto p2 = unwrapped_phase(field(s.text("f2")));
        const std::size_t k0 = grid_.samples_in(s.number("t_begin"), "t_begin");
        const std::size_t lmax = grid_.samples_in(s.number("max_lag"), "max_lag");
        if (lmax < 2 || k0 + lmax >= p1.size())
            throw ConfigError("phase_msd: max_lag must be at least two samples and fit after t_begin");
        std::vector<double> rel(p1.size() - k0);
        for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = p1[k0 + i] - p2[k0 + i];
        std::vector<double> lags, msd;
        const std::size_t points = std::min<std::size_t>(lmax, 32);
        for (std::size_t q = 1; q <= points; ++q) {
            const std::size_t lag = q * lmax / points;
            double acc = 0.0;
            const std::size_t m = rel.size() - lag;
            for (std::size_t i = 0; i < m; ++i) acc += (rel[i + lag] - rel[i]) * (rel[i + lag] - rel[i]);
            lags.push_back(grid_.dt() * static_cast<double>(lag));
            msd.push_back(acc / static_cast<double>(m));
        }
        const LinearFit fit = fit_line(lags, msd);
        rep.values.emplace_back("slope", fit.slope);
        rep.values.emplace_back("intercept", fit.intercept);
        rep.values.emplace_back("r_squared", fit.r_squared);
        if (s.has("expected")) {
            const double e = s.number("expected");
            const double err = std::abs(fit.slope - e) / std::abs(e);
            rep.values.emplace_back("expected", e);
            rep.values.emplace_back("rel_error", err);
            rep.values.emplace_back("tolerance", s.number("tolerance"));
            rep.pass = err <= s.number("tolerance");
        }
    }

    const ScenarioConfig& cfg_;
    TimeGrid grid_;
    SeedStream root_;
    std::vector<int> state_;
    std::map<std::string, std::size_t> producer_;
    std::map<std::string, Signal> signals_;
};

}  // namespace

RunResult run(const ScenarioConfig& config, std::optional<std::uint64_t> seed_override) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.config = config;
    result.seed = seed_override ? *seed_override : config.seed.value_or(kDefaultSeed);
    result.samples = config.n;
    result.warnings = config.warnings;

    std::vector<std::string> collected;
    WarningSink previous = set_warning_sink([&](const std::string& m) { collected.push_back(m); });
    try {
        Runner r(config, result.seed);
        r.evaluate_all();
        if (const Section* out = config.find("output")) {
            for (const auto& name : out->list("traces")) {
                const auto colon = name.find(':');
                const Signal& sig = r.lookup(colon == std::string::npos ? name : name.substr(0, colon));
                if (colon == std::string::npos)
                    result.traces.push_back(NamedTrace{name, sig.unit, sig.data});
                else
                    result.traces.push_back(NamedTrace{name, sig.unit, r.real(name)});
            }
        }
        result.spectra = std::move(r.spectra);
        result.reports = std::move(r.reports);
    } catch (...) {
        set_warning_sink(std::move(previous));
        throw;
    }
    set_warning_sink(std::move(previous));
    for (auto& w : collected) {
        warn(w);
        result.warnings.push_back(std::move(w));
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace lockbench
