#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "lockbench/control.hpp"
#include "lockbench/laser.hpp"
#include "lockbench/scenario.hpp"
#include "schema.hpp"

namespace lockbench {

// ---------------------------------------------------------------------------
// Errors

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& d) {
    std::ostringstream os;
    os << d.size() << " problem" << (d.size() == 1 ? "" : "s") << " in scenario:";
    for (const auto& x : d) {
        os << "\n  ";
        if (x.line > 0) os << "line " << x.line << ": ";
        if (!x.where.empty()) os << x.where << ": ";
        os << x.message;
        if (!x.hint.empty()) os << " (hint: " << x.hint << ")";
    }
    return os.str();
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diagnostics)
    : ConfigError(join_diagnostics(diagnostics)), diags_(std::move(diagnostics)) {}

RunError::RunError(std::string element, const std::string& what)
    : Error(element + ": " + what), element_(std::move(element)) {}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Value parsing

namespace schema {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool plain_number(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

// Accepts decimal numbers and the forms pi, pi/q, p*pi, p*pi/q.
bool parse_number(std::string_view text, double& out) {
    const std::string s = trim(text);
    if (plain_number(s, out)) return true;
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return false;
    double p = 1.0, q = 1.0;
    const std::string head = trim(std::string_view(s).substr(0, pos));
    const std::string tail = trim(std::string_view(s).substr(pos + 2));
    if (!head.empty()) {
        if (head == "-") {
            p = -1.0;
        } else {
            if (head.back() != '*') return false;
            if (!plain_number(trim(std::string_view(head).substr(0, head.size() - 1)), p))
                return false;
        }
    }
    if (!tail.empty()) {
        if (tail.front() != '/') return false;
        if (!plain_number(trim(std::string_view(tail).substr(1)), q) || q == 0.0) return false;
    }
    out = p * std::numbers::pi / q;
    return true;
}

// Accepts decimal integers and b^e.
bool parse_integer(std::string_view text, std::uint64_t& out) {
    const std::string s = trim(text);
    const auto caret = s.find('^');
    auto whole = [](std::string_view v, std::uint64_t& o) {
        if (v.empty()) return false;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), o);
        return r.ec == std::errc() && r.ptr == v.data() + v.size();
    };
    if (caret == std::string::npos) return whole(s, out);
    std::uint64_t b = 0, e = 0;
    if (!whole(trim(std::string_view(s).substr(0, caret)), b) ||
        !whole(trim(std::string_view(s).substr(caret + 1)), e) || e > 63)
        return false;
    std::uint64_t v = 1;
    for (std::uint64_t i = 0; i < e; ++i) {
        if (b != 0 && v > UINT64_MAX / b) return false;
        v *= b;
    }
    out = v;
    return true;
}

bool parse_bool(std::string_view text, bool& out) {
    const std::string s = trim(text);
    if (s == "true" || s == "yes" || s == "on" || s == "1") {
        out = true;
        return true;
    }
    if (s == "false" || s == "no" || s == "off" || s == "0") {
        out = false;
        return true;
    }
    return false;
}

bool parse_band(std::string_view text, std::pair<double, double>& out) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) return false;
    return parse_number(parts[0], out.first) && parse_number(parts[1], out.second) &&
           out.first < out.second;
}

bool parse_windows(std::string_view text, std::vector<TimeWindow>& out) {
    out.clear();
    for (const auto& w : split(text, ',')) {
        const auto ab = split(w, ':');
        TimeWindow tw;
        if (ab.size() != 2 || !parse_number(ab[0], tw.first) || !parse_number(ab[1], tw.second))
            return false;
        out.push_back(tw);
    }
    return true;
}

bool valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '-'))
            return false;
    return std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_';
}

// ---------------------------------------------------------------------------
// Schema tables

namespace {

using V = ValueType;

const std::vector<KeySpec> kGrid = {
    {"dt", V::number, "", {}, true, "seconds per sample"},
    {"n", V::integer, "", {}, true, "sample count, e.g. 2^21"},
};

const std::vector<KeySpec> kRun = {
    {"seed", V::integer, "", {}, false, "master seed"},
};

const std::vector<KeySpec> kLaserLinear = {
    {"model", V::choice, "linear", {"linear", "potential"}, false, ""},
    {"r0", V::number, "1", {}, false, "mean flux amplitude, sqrt(Hz)"},
    {"gamma", V::number, "0", {}, false, "inverse photon lifetime, rad/s"},
};

const std::vector<KeySpec> kLaserPotential = {
    {"model", V::choice, "linear", {"linear", "potential"}, false, ""},
    {"alpha", V::number, "2.6", {}, false, "gain rate, 1/s"},
    {"gamma0", V::number, "1", {}, false, "cavity decay rate, 1/s"},
    {"C", V::number, "0.8", {}, false, "gain saturation"},
    {"noise_psd", V::number, "0", {}, false, "Langevin PSD per quadrature"},
    {"initial_phase", V::number, "0", {}, false, "radians"},
    {"initial_radius", V::number, "", {}, false, "defaults to the steady radius"},
};

const std::vector<KeySpec> kVacuum = {};

const std::vector<KeySpec> kBeamSplitter = {
    {"theta", V::number, "pi/4", {}, false, "r = sin(theta)"},
    {"in_a", V::field_ref, "", {}, true, ""},
    {"in_b", V::field_ref, "", {}, true, ""},
};

const std::vector<KeySpec> kPhaseShift = {
    {"in", V::field_ref, "", {}, true, ""},
    {"phi", V::number, "0", {}, false, "constant phase, radians"},
    {"phi_signal", V::real_ref, "", {}, false, "time-varying phase, radians"},
    {"linearized", V::boolean, "false", {}, false, ""},
};

const std::vector<KeySpec> kDelay = {
    {"in", V::field_ref, "", {}, true, ""},
    {"tau", V::time, "", {}, true, "seconds, a multiple of dt"},
};

const std::vector<KeySpec> kTimeGate = {
    {"in", V::field_ref, "", {}, true, ""},
    {"windows", V::windows, "", {}, false, "start:stop, start:stop, ..."},
};

const std::vector<KeySpec> kFeedforward = {
    {"slave", V::field_ref, "", {}, true, ""},
    {"master_arm", V::field_ref, "", {}, true, ""},
    {"theta_tap", V::number, "pi/4", {}, false, ""},
    {"gain", V::gain, "nominal", {}, false, "nominal or radians per unit error"},
    {"master_amplitude", V::number, "", {}, false, "b0 for the nominal gain"},
    {"epsilon", V::number, "0", {}, false, "gain = (1 + epsilon) gain"},
    {"actuator_range", V::number, "", {}, false, "radians"},
    {"unlock_at", V::time, "", {}, false, "seconds"},
};

const std::vector<KeySpec> kDualLock = {
    {"slave_a", V::field_ref, "", {}, true, ""},
    {"slave_b", V::field_ref, "", {}, true, ""},
    {"master", V::field_ref, "", {}, true, ""},
    {"theta_tap", V::number, "pi/4", {}, false, ""},
    {"gain", V::gain, "nominal", {}, false, "nominal or radians per unit error"},
    {"epsilon", V::number, "0", {}, false, "gain = (1 + epsilon) gain"},
    {"actuator_range", V::number, "", {}, false, "radians"},
    {"unlock_at", V::time, "", {}, false, "seconds"},
};

const std::vector<KeySpec> kFeedback = {
    {"slave", V::laser_ref, "", {}, true, "a linear [laser]"},
    {"master_arm", V::field_ref, "", {}, true, ""},
    {"loop_gain", V::number, "", {}, true, "rad/s per radian"},
    {"loop_delay", V::time, "", {}, true, "seconds"},
    {"filter_bandwidth", V::number, "", {}, true, "rad/s"},
    {"theta_tap", V::number, "pi/4", {}, false, ""},
    {"divergence_factor", V::number, "1000", {}, false, ""},
};

const std::vector<KeySpec> kHomodyne = {
    {"sig", V::field_ref, "", {}, true, ""},
    {"lo", V::field_ref, "", {}, false, "required unless mode = photocurrent"},
    {"mode", V::choice, "balanced", {"balanced", "error", "photocurrent"}, false, ""},
};

std::vector<KeySpec> spectrum_keys() {
    return {
        {"kind", V::choice, "", {"psd", "compare", "flatness", "coherence", "stationarity", "phase_msd"}, true, ""},
        {"signal", V::real_ref, "", {}, true, "real signal or FIELD:quad / FIELD:inphase"},
        {"segment", V::integer, "65536", {}, false, "Welch segment length, samples"},
        {"overlap", V::number, "0.5", {}, false, ""},
        {"detrend", V::choice, "none", {"none", "mean"}, false, ""},
        {"increments", V::boolean, "false", {}, false, "estimate from first differences"},
    };
}

std::vector<KeySpec> analysis_keys(const std::string& kind) {
    const KeySpec kind_key{"kind", V::choice, "", {"psd", "compare", "flatness", "coherence", "stationarity", "phase_msd"}, true, ""};
    if (kind == "psd") return spectrum_keys();
    if (kind == "compare") {
        auto k = spectrum_keys();
        const std::vector<KeySpec> more = {
            {"band", V::band, "", {}, true, "lo, hi in rad/s"},
            {"tolerance", V::number, "", {}, true, "relative"},
            {"curve", V::choice, "", {"coherent_quadrature", "laser_quad2", "locked_beat", "delayed_homodyne_spectrum"}, true, ""},
            {"gamma", V::number, "0", {}, false, ""},
            {"t", V::number, "0.7071067811865476", {}, false, ""},
            {"r", V::number, "0.7071067811865476", {}, false, ""},
            {"a0", V::number, "0", {}, false, ""},
            {"b0", V::number, "0", {}, false, ""},
            {"r0", V::number, "0", {}, false, ""},
            {"tau", V::number, "0", {}, false, ""},
            {"T", V::number, "0", {}, false, ""},
            {"scale", V::number, "1", {}, false, "multiplies the reference"},
            {"groups", V::integer, "0", {}, false, "log-spaced sub-bands; 0 compares bins"},
        };
        k.insert(k.end(), more.begin(), more.end());
        return k;
    }
    if (kind == "flatness") {
        auto k = spectrum_keys();
        const std::vector<KeySpec> more = {
            {"low_band", V::band, "", {}, true, "lo, hi in rad/s"},
            {"high_band", V::band, "", {}, true, "lo, hi in rad/s"},
            {"min_ratio", V::number, "0.8", {}, false, ""},
            {"max_ratio", V::number, "1.25", {}, false, ""},
        };
        k.insert(k.end(), more.begin(), more.end());
        return k;
    }
    if (kind == "coherence")
        return {kind_key,
                {"f", V::field_ref, "", {}, true, ""},
                {"f2", V::field_ref, "", {}, true, ""},
                {"averaging_T", V::time, "", {}, true, "seconds"},
                {"threshold", V::number, "0.01", {}, false, "on condition_ratio"},
                {"t_begin", V::time, "0", {}, false, "seconds"},
                {"t_end", V::number, "-1", {}, false, "seconds; negative means the end"}};
    if (kind == "stationarity")
        return {kind_key,
                {"signal", V::real_ref, "", {}, true, ""},
                {"tolerance", V::number, "0.25", {}, false, "on |var2/var1 - 1|"},
                {"t_begin", V::time, "0", {}, false, "seconds"}};
    if (kind == "phase_msd")
        return {kind_key,
                {"f", V::field_ref, "", {}, true, ""},
                {"f2", V::field_ref, "", {}, true, ""},
                {"t_begin", V::time, "0", {}, false, "seconds"},
                {"max_lag", V::time, "", {}, true, "seconds"},
                {"expected", V::number, "", {}, false, "rad^2/s"},
                {"tolerance", V::number, "0.1", {}, false, "relative"}};
    return {kind_key};
}

const std::vector<KeySpec> kOutput = {
    {"dir", V::text, "", {}, false, "output directory"},
    {"traces", V::name_list, "", {}, false, "signals written to traces.csv"},
    {"decimate", V::integer, "1", {}, false, "keep every k-th sample"},
};

}  // namespace

const std::vector<std::string>& section_kinds() {
    static const std::vector<std::string> k = {
        "grid",     "run",   "laser",       "vacuum",     "beam_splitter", "phase_shift",
        "delay",    "time_gate", "feedforward", "dual_lock", "feedback",    "homodyne",
        "analysis", "output"};
    return k;
}

bool is_named(const std::string& kind) {
    return kind != "grid" && kind != "run" && kind != "output";
}

std::vector<KeySpec> keys_for(const std::string& kind,
                              const std::map<std::string, std::string>& raw) {
    auto get = [&](const char* k, const char* dflt) {
        auto it = raw.find(k);
        return it == raw.end() ? std::string(dflt) : trim(it->second);
    };
    if (kind == "grid") return kGrid;
    if (kind == "run") return kRun;
    if (kind == "laser") return get("model", "linear") == "potential" ? kLaserPotential : kLaserLinear;
    if (kind == "vacuum") return kVacuum;
    if (kind == "beam_splitter") return kBeamSplitter;
    if (kind == "phase_shift") return kPhaseShift;
    if (kind == "delay") return kDelay;
    if (kind == "time_gate") return kTimeGate;
    if (kind == "feedforward") return kFeedforward;
    if (kind == "dual_lock") return kDualLock;
    if (kind == "feedback") return kFeedback;
    if (kind == "homodyne") return kHomodyne;
    if (kind == "analysis") return analysis_keys(get("kind", ""));
    if (kind == "output") return kOutput;
    return {};
}

std::vector<Output> outputs_of(const Section& s) {
    const std::string& n = s.name;
    if (s.kind == "laser" || s.kind == "vacuum" || s.kind == "phase_shift" || s.kind == "delay" ||
        s.kind == "time_gate")
        return {{n, true, "Hz^0.5"}};
    if (s.kind == "beam_splitter") return {{n + ".a", true, "Hz^0.5"}, {n + ".b", true, "Hz^0.5"}};
    if (s.kind == "feedforward") {
        std::vector<Output> o = {{n, true, "Hz^0.5"},
                                 {n + ".c", true, "Hz^0.5"},
                                 {n + ".error", false, "Hz"},
                                 {n + ".correction", false, "rad"}};
        if (s.has("unlock_at")) o.push_back({n + ".coast", true, "Hz^0.5"});
        return o;
    }
    if (s.kind == "dual_lock") {
        std::vector<Output> o = {{n + ".f", true, "Hz^0.5"},        {n + ".f2", true, "Hz^0.5"},
                                 {n + ".k", true, "Hz^0.5"},        {n + ".k2", true, "Hz^0.5"},
                                 {n + ".beat", false, "Hz"},        {n + ".error", false, "Hz"},
                                 {n + ".error2", false, "Hz"},      {n + ".correction", false, "rad"},
                                 {n + ".correction2", false, "rad"}};
        if (s.has("unlock_at")) {
            o.push_back({n + ".coast", true, "Hz^0.5"});
            o.push_back({n + ".coast2", true, "Hz^0.5"});
            o.push_back({n + ".coast_beat", false, "Hz"});
        }
        return o;
    }
    if (s.kind == "feedback")
        return {{n, true, "Hz^0.5"},
                {n + ".error", false, "Hz"},
                {n + ".correction", false, "rad"},
                {n + ".frequency", false, "rad/s"}};
    if (s.kind == "homodyne") return {{n, false, "Hz"}};
    return {};
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string suggest(std::string_view word, const std::vector<std::string>& options) {
    std::string best;
    std::size_t bd = 3;
    for (const auto& o : options) {
        const std::size_t d = edit_distance(word, o);
        if (d < bd) {
            bd = d;
            best = o;
        }
    }
    return best;
}

}  // namespace schema

// ---------------------------------------------------------------------------
// Section accessors

namespace {

const std::string* lookup(const Section& s, const std::string& key) {
    for (const auto& [k, v] : s.values)
        if (k == key) return &v;
    return nullptr;
}

[[noreturn]] void bad_access(const Section& s, const std::string& key, const char* what) {
    throw ConfigError(s.label() + ": key '" + key + "' " + what);
}

}  // namespace

bool Section::has(const std::string& key) const { return lookup(*this, key) != nullptr; }

const std::string& Section::text(const std::string& key) const {
    const std::string* v = lookup(*this, key);
    if (v == nullptr) bad_access(*this, key, "is not set");
    return *v;
}

double Section::number(const std::string& key) const {
    double x = 0.0;
    if (!schema::parse_number(text(key), x)) bad_access(*this, key, "is not a number");
    return x;
}

std::uint64_t Section::integer(const std::string& key) const {
    std::uint64_t x = 0;
    if (!schema::parse_integer(text(key), x)) bad_access(*this, key, "is not an integer");
    return x;
}

bool Section::boolean(const std::string& key) const {
    bool b = false;
    if (!schema::parse_bool(text(key), b)) bad_access(*this, key, "is not a boolean");
    return b;
}

std::vector<std::string> Section::list(const std::string& key) const {
    return schema::split(text(key), ',');
}

std::pair<double, double> Section::band(const std::string& key) const {
    std::pair<double, double> b;
    if (!schema::parse_band(text(key), b)) bad_access(*this, key, "is not a band");
    return b;
}

std::vector<TimeWindow> Section::windows(const std::string& key) const {
    std::vector<TimeWindow> w;
    if (!schema::parse_windows(text(key), w)) bad_access(*this, key, "is not a window list");
    return w;
}

std::string Section::label() const {
    return name.empty() ? "[" + kind + "]" : "[" + kind + " " + name + "]";
}

const Section* ScenarioConfig::find(const std::string& kind, const std::string& name) const {
    for (const auto& s : sections)
        if (s.kind == kind && s.name == name) return &s;
    return nullptr;
}

std::vector<const Section*> ScenarioConfig::all(const std::string& kind) const {
    std::vector<const Section*> out;
    for (const auto& s : sections)
        if (s.kind == kind) out.push_back(&s);
    return out;
}

std::string ScenarioConfig::echo() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& s : sections) {
        if (!first) os << '\n';
        first = false;
        os << s.label() << '\n';
        for (const auto& [k, v] : s.values) os << k << " = " << v << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct RawEntry {
    std::string value;
    int line;
};

struct RawSection {
    std::string kind;
    std::string name;
    int line;
    std::map<std::string, RawEntry> entries;
    std::vector<std::string> order;
};

class Parser {
  public:
    explicit Parser(const std::vector<Override>& overrides) : overrides_(overrides) {}

    ScenarioConfig parse(const std::string& text) {
        read(text);
        apply_overrides();
        ScenarioConfig cfg;
        build(cfg);
        check_grid(cfg);
        if (!(cfg.dt > 0.0) || cfg.n < 2) throw ScenarioError(diags_);
        check_graph(cfg);
        check_timing(cfg);
        check_analyses(cfg);
        check_ranges(cfg);
        if (!diags_.empty()) throw ScenarioError(diags_);
        warn_unused(cfg);
        return cfg;
    }

  private:
    void error(int line, std::string where, std::string msg, std::string hint = "") {
        diags_.push_back({line, std::move(where), std::move(msg), std::move(hint)});
    }

    void read(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        int line = 0;
        RawSection* cur = nullptr;
        const auto& kinds = schema::section_kinds();
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string s = schema::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (s.empty()) continue;
            if (s.front() == '[') {
                cur = nullptr;
                if (s.back() != ']') {
                    error(line, "", "malformed section header '" + s + "'", "use [kind] or [kind name]");
                    continue;
                }
                const auto parts = schema::split(schema::trim(s.substr(1, s.size() - 2)), ' ');
                std::vector<std::string> words;
                for (const auto& p : parts)
                    if (!p.empty()) words.push_back(p);
                if (words.empty() || words.size() > 2) {
                    error(line, "", "malformed section header '" + s + "'", "use [kind] or [kind name]");
                    continue;
                }
                const std::string kind = words[0];
                const std::string name = words.size() == 2 ? words[1] : "";
                if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
                    const std::string near = schema::suggest(kind, kinds);
                    error(line, "[" + kind + "]", "unknown section kind '" + kind + "'",
                          near.empty() ? "valid kinds: grid, run, laser, vacuum, beam_splitter, "
                                         "phase_shift, delay, time_gate, feedforward, dual_lock, "
                                         "feedback, homodyne, analysis, output"
                                       : "did you mean '" + near + "'?");
                    continue;
                }
                if (schema::is_named(kind) && name.empty()) {
                    error(line, "[" + kind + "]", "section needs a name", "write [" + kind + " NAME]");
                    continue;
                }
                if (!schema::is_named(kind) && !name.empty()) {
                    error(line, "[" + kind + " " + name + "]", "section takes no name",
                          "write [" + kind + "]");
                    continue;
                }
                if (!name.empty() && !schema::valid_identifier(name)) {
                    error(line, "[" + kind + " " + name + "]", "invalid name '" + name + "'",
                          "names use letters, digits, _ - and '");
                    continue;
                }
                bool clash = false;
                for (const auto& r : raw_) {
                    if (r.kind == kind && r.name == name) {
                        error(line, "[" + kind + (name.empty() ? "" : " " + name) + "]",
                              "duplicate section (first at line " + std::to_string(r.line) + ")",
                              "merge the two blocks or rename one");
                        clash = true;
                        break;
                    }
                    if (!name.empty() && r.name == name && schema::is_named(r.kind)) {
                        error(line, "[" + kind + " " + name + "]",
                              "name '" + name + "' already used by [" + r.kind + "] at line " +
                                  std::to_string(r.line),
                              "element names are global");
                        clash = true;
                        break;
                    }
                }
                if (!clash) {
                    raw_.push_back(RawSection{kind, name, line, {}, {}});
                    cur = &raw_.back();
                }
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                error(line, "", "expected 'key = value', got '" + s + "'");
                continue;
            }
            if (cur == nullptr) {
                error(line, "", "key outside any valid section", "start a section with [kind name]");
                continue;
            }
            const std::string key = schema::trim(s.substr(0, eq));
            const std::string value = schema::trim(s.substr(eq + 1));
            const std::string where = label(*cur) + " " + key;
            if (cur->entries.count(key) != 0) {
                error(line, where,
                      "duplicate key (first at line " + std::to_string(cur->entries[key].line) + ")");
                continue;
            }
            cur->entries[key] = RawEntry{value, line};
            cur->order.push_back(key);
        }
    }

    static std::string label(const RawSection& r) {
        return r.name.empty() ? "[" + r.kind + "]" : "[" + r.kind + " " + r.name + "]";
    }

    void apply_overrides() {
        for (const auto& o : overrides_) {
            const auto parts = schema::split(o.path, '.');
            std::string kind, name, key;
            if (parts.size() == 2) {
                kind = parts[0];
                key = parts[1];
            } else if (parts.size() == 3) {
                kind = parts[0];
                name = parts[1];
                key = parts[2];
            } else {
                error(0, "override " + o.path, "path must be kind.key or kind.name.key");
                continue;
            }
            RawSection* target = nullptr;
            for (auto& r : raw_)
                if (r.kind == kind && r.name == name) target = &r;
            if (target == nullptr) {
                error(0, "override " + o.path,
                      "no section [" + kind + (name.empty() ? "" : " " + name) + "] in the document");
                continue;
            }
            if (target->entries.count(key) == 0) target->order.push_back(key);
            target->entries[key] = RawEntry{o.value, 0};
        }
    }

    void build(ScenarioConfig& cfg) {
        if (std::none_of(raw_.begin(), raw_.end(), [](const RawSection& r) { return r.kind == "grid"; }))
            error(0, "[grid]", "missing [grid] section", "add [grid] with dt and n");
        for (const auto& r : raw_) {
            std::map<std::string, std::string> plain;
            for (const auto& [k, e] : r.entries) plain[k] = e.value;
            const auto keys = schema::keys_for(r.kind, plain);
            Section sec;
            sec.kind = r.kind;
            sec.name = r.name;
            sec.line = r.line;
            std::vector<std::string> names;
            for (const auto& k : keys) names.push_back(k.key);
            bool complete = true;
            for (const auto& k : r.order) {
                if (std::find(names.begin(), names.end(), k) == names.end()) {
                    const std::string near = schema::suggest(k, names);
                    std::string valid;
                    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
                    error(r.entries.at(k).line, label(r) + " " + k, "unknown key '" + k + "'",
                          near.empty() ? (valid.empty() ? "this section takes no keys"
                                                        : "valid keys: " + valid)
                                       : "did you mean '" + near + "'?");
                }
            }
            for (const auto& k : keys) {
                auto it = r.entries.find(k.key);
                const int line = it == r.entries.end() ? r.line : it->second.line;
                const std::string where = label(r) + " " + k.key;
                std::string value;
                if (it != r.entries.end()) {
                    value = it->second.value;
                } else if (k.required) {
                    error(r.line, where, "missing required key '" + k.key + "'",
                          k.help.empty() ? "" : k.help);
                    complete = false;
                    continue;
                } else if (k.default_text.empty() && k.type != schema::ValueType::windows &&
                           k.type != schema::ValueType::name_list) {
                    continue;
                } else {
                    value = k.default_text;
                }
                std::string canonical;
                if (!canonicalize(k, value, canonical)) {
                    error(line, where, "bad value '" + value + "'", expected(k));
                    complete = false;
                    continue;
                }
                sec.values.emplace_back(k.key, canonical);
            }
            if (r.kind == "grid") {
                if (sec.has("dt")) cfg.dt = sec.number("dt");
                if (sec.has("n")) cfg.n = static_cast<std::size_t>(sec.integer("n"));
            }
            if (r.kind == "run" && sec.has("seed")) cfg.seed = sec.integer("seed");
            complete_.push_back(complete);
            cfg.sections.push_back(std::move(sec));
        }
    }

    static std::string expected(const schema::KeySpec& k) {
        using V = schema::ValueType;
        switch (k.type) {
            case V::number: return "expected a number (pi, pi/4 and 2*pi/3 are accepted)";
            case V::time: return "expected a time in seconds";
            case V::integer: return "expected a non-negative integer (2^k is accepted)";
            case V::boolean: return "expected true or false";
            case V::band: return "expected 'lo, hi' with lo < hi";
            case V::windows: return "expected 'start:stop, start:stop'";
            case V::gain: return "expected 'nominal' or a number";
            case V::choice: {
                std::string c;
                for (const auto& x : k.choices) c += (c.empty() ? "" : ", ") + x;
                return "expected one of " + c;
            }
            default: return "expected a name";
        }
    }

    static bool canonicalize(const schema::KeySpec& k, const std::string& v, std::string& out) {
        using V = schema::ValueType;
        switch (k.type) {
            case V::number:
            case V::time: {
                double x;
                if (!schema::parse_number(v, x)) return false;
                out = format_double(x);
                return true;
            }
            case V::integer: {
                std::uint64_t x;
                if (!schema::parse_integer(v, x)) return false;
                out = std::to_string(x);
                return true;
            }
            case V::boolean: {
                bool b;
                if (!schema::parse_bool(v, b)) return false;
                out = b ? "true" : "false";
                return true;
            }
            case V::band: {
                std::pair<double, double> b;
                if (!schema::parse_band(v, b)) return false;
                out = format_double(b.first) + ", " + format_double(b.second);
                return true;
            }
            case V::windows: {
                std::vector<TimeWindow> w;
                if (!schema::parse_windows(v, w)) return false;
                out.clear();
                for (const auto& [a, b] : w)
                    out += (out.empty() ? "" : ", ") + format_double(a) + ":" + format_double(b);
                return true;
            }
            case V::gain: {
                if (schema::trim(v) == "nominal") {
                    out = "nominal";
                    return true;
                }
                double x;
                if (!schema::parse_number(v, x)) return false;
                out = format_double(x);
                return true;
            }
            case V::choice:
                if (std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) return false;
                out = v;
                return true;
            case V::name_list: {
                out.clear();
                for (const auto& n : schema::split(v, ',')) {
                    if (n.empty()) return false;
                    out += (out.empty() ? "" : ", ") + n;
                }
                return true;
            }
            case V::field_ref:
            case V::real_ref:
            case V::laser_ref:
            case V::text:
                if (v.empty()) return false;
                out = v;
                return true;
        }
        return false;
    }

    void check_grid(ScenarioConfig& cfg) {
        const Section* g = cfg.find("grid");
        if (g == nullptr) return;
        if (!(cfg.dt > 0.0)) error(g->line, "[grid] dt", "dt must be positive", "e.g. dt = 0.01");
        if (cfg.n < 2) error(g->line, "[grid] n", "n must be at least 2", "e.g. n = 2^20");
    }

    // Signal name -> (producing section index, is field)
    struct Produced {
        std::size_t section;
        bool field;
    };

    std::map<std::string, Produced> produced(const ScenarioConfig& cfg) {
        std::map<std::string, Produced> p;
        for (std::size_t i = 0; i < cfg.sections.size(); ++i)
            for (const auto& o : schema::outputs_of(cfg.sections[i]))
                p[o.name] = Produced{i, o.field};
        return p;
    }

    static std::string base_signal(const std::string& ref, std::string* suffix = nullptr) {
        const auto c = ref.find(':');
        if (suffix != nullptr) *suffix = c == std::string::npos ? "" : ref.substr(c + 1);
        return c == std::string::npos ? ref : ref.substr(0, c);
    }

    void check_graph(const ScenarioConfig& cfg) {
        const auto prod = produced(cfg);
        std::vector<std::string> names;
        for (const auto& [n, p] : prod) names.push_back(n);
        deps_.assign(cfg.sections.size(), {});
        for (std::size_t i = 0; i < cfg.sections.size(); ++i) {
            const Section& s = cfg.sections[i];
            std::map<std::string, std::string> plain;
            for (const auto& [k, v] : s.values) plain[k] = v;
            for (const auto& k : schema::keys_for(s.kind, plain)) {
                if (!s.has(k.key)) continue;
                const std::string where = s.label() + " " + k.key;
                using V = schema::ValueType;
                std::vector<std::string> refs;
                if (k.type == V::field_ref || k.type == V::real_ref || k.type == V::laser_ref)
                    refs.push_back(s.text(k.key));
                else if (k.type == V::name_list)
                    refs = s.list(k.key);
                else
                    continue;
                for (const auto& ref : refs) {
                    std::string suffix;
                    const std::string base = base_signal(ref, &suffix);
                    auto it = prod.find(base);
                    if (it == prod.end()) {
                        const std::string near = schema::suggest(base, names);
                        error(s.line, where, "unresolved name '" + base + "'",
                              near.empty() ? "define it in an earlier section" : "did you mean '" + near + "'?");
                        continue;
                    }
                    deps_[i].push_back(it->second.section);
                    const bool is_field = it->second.field;
                    if (!suffix.empty() && (suffix != "quad" && suffix != "inphase")) {
                        error(s.line, where, "unknown field view ':" + suffix + "'", "use :quad or :inphase");
                    } else if (!suffix.empty() && !is_field) {
                        error(s.line, where, "'" + base + "' is a real signal and has no :" + suffix + " view");
                    } else if (k.type == V::field_ref && (!is_field || !suffix.empty())) {
                        error(s.line, where, "'" + ref + "' is not a field", "this key needs a complex field");
                    } else if (k.type == V::real_ref && is_field && suffix.empty()) {
                        error(s.line, where, "'" + ref + "' is a field",
                              "pick a quadrature with '" + ref + ":quad' or '" + ref + ":inphase'");
                    } else if (k.type == V::laser_ref) {
                        const Section& t = cfg.sections[it->second.section];
                        if (t.kind != "laser" || !t.has("model") || t.text("model") != "linear" ||
                            base != t.name)
                            error(s.line, where, "'" + ref + "' is not a linear [laser]",
                                  "feedback simulates the slave from its laser parameters");
                    }
                }
            }
        }
        // Cycles.
        std::vector<int> state(cfg.sections.size(), 0);
        std::function<bool(std::size_t)> visit = [&](std::size_t i) {
            if (state[i] == 1) return true;
            if (state[i] == 2) return false;
            state[i] = 1;
            for (std::size_t j : deps_[i])
                if (visit(j)) {
                    if (state[i] == 1) {
                        error(cfg.sections[i].line, cfg.sections[i].label(),
                              "wiring contains a cycle through this element",
                              "feedforward wiring must be acyclic");
                        state[i] = 2;
                    }
                    return true;
                }
            state[i] = 2;
            return false;
        };
        for (std::size_t i = 0; i < cfg.sections.size(); ++i)
            if (state[i] == 0) visit(i);
    }

    void check_time(const ScenarioConfig& cfg, const Section& s, const std::string& key, double seconds) {
        const double k = seconds / cfg.dt;
        const double kr = std::round(k);
        if (!(seconds >= 0.0) || std::abs(k - kr) > 1e-9 * std::max(1.0, kr)) {
            std::ostringstream msg, hint;
            msg.precision(17);
            hint.precision(17);
            msg << key << " = " << seconds << " s is not a multiple of dt = " << cfg.dt << " s";
            hint << "nearest valid value is " << std::max(0.0, kr) * cfg.dt << " s";
            error(s.line, s.label() + " " + key, msg.str(), hint.str());
        } else if (kr > static_cast<double>(cfg.n)) {
            std::ostringstream msg;
            msg << key << " = " << seconds << " s lies beyond the grid end " << cfg.dt * cfg.n << " s";
            error(s.line, s.label() + " " + key, msg.str(), "shorten it or raise [grid] n");
        }
    }

    void check_timing(const ScenarioConfig& cfg) {
        for (std::size_t i = 0; i < cfg.sections.size(); ++i) {
            if (!complete_[i]) continue;
            const Section& s = cfg.sections[i];
            std::map<std::string, std::string> plain;
            for (const auto& [k, v] : s.values) plain[k] = v;
            for (const auto& k : schema::keys_for(s.kind, plain)) {
                if (!s.has(k.key)) continue;
                if (k.type == schema::ValueType::time) check_time(cfg, s, k.key, s.number(k.key));
                if (k.type == schema::ValueType::windows) {
                    for (const auto& [a, b] : s.windows(k.key)) {
                        check_time(cfg, s, k.key + " start", a);
                        check_time(cfg, s, k.key + " stop", b);
                        if (b < a)
                            error(s.line, s.label() + " " + k.key, "window " + format_double(a) + ":" +
                                                                       format_double(b) + " is reversed");
                    }
                }
            }
            const double nyq = std::numbers::pi / cfg.dt;
            if (s.kind == "feedback" && s.has("filter_bandwidth") && !(s.number("filter_bandwidth") < nyq))
                error(s.line, s.label() + " filter_bandwidth",
                      "filter_bandwidth must be below the Nyquist limit " + format_double(nyq) + " rad/s");
            if (s.kind == "analysis") {
                for (const char* key : {"band", "low_band", "high_band"})
                    if (s.has(key) && !(s.band(key).second < nyq))
                        error(s.line, s.label() + " " + key,
                              std::string(key) + " reaches the Nyquist limit " + format_double(nyq) + " rad/s",
                              "lower the band or reduce dt");
            }
        }
    }

    void check_analyses(const ScenarioConfig& cfg) {
        const Section* first = nullptr;
        for (const Section* s : complete_sections(cfg, "analysis")) {
            const std::string kind = s->text("kind");
            if (kind != "psd" && kind != "compare" && kind != "flatness") continue;
            if (s->integer("segment") > cfg.n)
                error(s->line, s->label() + " segment", "segment exceeds the grid length", "lower segment or raise [grid] n");
            if (first == nullptr) {
                first = s;
            } else if (s->integer("segment") != first->integer("segment")) {
                error(s->line, s->label() + " segment",
                      "spectra share one frequency grid; segment differs from " + first->label(),
                      "use segment = " + first->text("segment"));
            }
            const double ov = s->number("overlap");
            if (!(ov >= 0.0 && ov <= 0.9))
                error(s->line, s->label() + " overlap", "overlap must lie in [0, 0.9]");
        }
        for (const Section* s : complete_sections(cfg, "homodyne"))
            if (s->text("mode") != "photocurrent" && !s->has("lo"))
                error(s->line, s->label() + " lo", "missing required key 'lo'", "needed unless mode = photocurrent");
        if (const Section* o = cfg.find("output"); o != nullptr && o->integer("decimate") == 0)
            error(o->line, "[output] decimate", "decimate must be at least 1");
    }

    std::vector<const Section*> complete_sections(const ScenarioConfig& cfg, const std::string& kind) const {
        std::vector<const Section*> out;
        for (std::size_t i = 0; i < cfg.sections.size(); ++i)
            if (complete_[i] && cfg.sections[i].kind == kind) out.push_back(&cfg.sections[i]);
        return out;
    }

    // Physical ranges, checked by the module validators themselves.
    void check_ranges(const ScenarioConfig& cfg) {
        const TimeGrid grid = cfg.grid();
        for (std::size_t i = 0; i < cfg.sections.size(); ++i) {
            if (!complete_[i]) continue;
            const Section& s = cfg.sections[i];
            try {
                if (s.kind == "laser" && s.text("model") == "linear") {
                    LinearLaserSpec{s.number("r0"), s.number("gamma")}.validate();
                } else if (s.kind == "laser") {
                    PotentialLaserSpec{s.number("alpha"), s.number("gamma0"), s.number("C"),
                                       s.number("noise_psd")}
                        .validate();
                    if (s.has("initial_radius") && !(s.number("initial_radius") >= 0.0))
                        throw ConfigError("initial_radius must be >= 0");
                } else if (s.kind == "feedforward" || s.kind == "dual_lock") {
                    if (!(s.number("theta_tap") > 0.0 && s.number("theta_tap") < 0.5 * std::numbers::pi))
                        throw ConfigError("theta_tap must lie in (0, pi/2)");
                    if (!(s.number("epsilon") > -1.0)) throw ConfigError("epsilon must exceed -1");
                    if (s.has("actuator_range") && !(s.number("actuator_range") > 0.0))
                        throw ConfigError("actuator_range must be > 0");
                    if (s.has("master_amplitude") && !(s.number("master_amplitude") > 0.0))
                        throw ConfigError("master_amplitude must be > 0");
                } else if (s.kind == "feedback") {
                    FeedbackSpec fb;
                    fb.loop_gain = s.number("loop_gain");
                    fb.loop_delay = s.number("loop_delay");
                    fb.filter_bandwidth = s.number("filter_bandwidth");
                    fb.theta_tap = s.number("theta_tap");
                    fb.divergence_factor = s.number("divergence_factor");
                    fb.validate(grid);
                }
            } catch (const ConfigError& e) {
                error(s.line, s.label(), e.what());
            }
        }
    }

    void warn_unused(ScenarioConfig& cfg) {
        std::vector<bool> used(cfg.sections.size(), false);
        for (std::size_t i = 0; i < deps_.size(); ++i)
            for (std::size_t j : deps_[i]) used[j] = true;
        for (std::size_t i = 0; i < cfg.sections.size(); ++i) {
            const Section& s = cfg.sections[i];
            if (!schema::is_named(s.kind) || s.kind == "analysis" || used[i]) continue;
            cfg.warnings.push_back("unused element " + s.label() + " (line " + std::to_string(s.line) +
                                   "): none of its outputs reaches an analysis or [output] traces");
        }
    }

    const std::vector<Override>& overrides_;
    std::vector<RawSection> raw_;
    std::vector<Diagnostic> diags_;
    std::vector<std::vector<std::size_t>> deps_;
    std::vector<bool> complete_;
};

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::vector<Override>& overrides) {
    Parser p(overrides);
    return p.parse(text);
}

ScenarioConfig load_scenario(const std::filesystem::path& file, const std::vector<Override>& overrides) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), overrides);
}

}  // namespace lockbench
