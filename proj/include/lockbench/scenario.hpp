#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lockbench/analysis.hpp"
#include "lockbench/error.hpp"
#include "lockbench/optics.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

/// One problem found while validating a scenario document.
struct Diagnostic {
    int line = 0;        // 1-based; 0 when not tied to a line
    std::string where;   // "[kind name] key"
    std::string message;
    std::string hint;
};

/// Every problem found in a document, not just the first.
class ScenarioError : public ConfigError {
  public:
    explicit ScenarioError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

  private:
    std::vector<Diagnostic> diags_;
};

/// A module error raised while executing one scenario element. The original
/// exception is nested.
class RunError : public Error {
  public:
    RunError(std::string element, const std::string& what);
    const std::string& element() const noexcept { return element_; }

  private:
    std::string element_;
};

/// One validated [kind name] block. Every key of the kind's schema is
/// present, defaults included.
class Section {
  public:
    std::string kind;
    std::string name;
    int line = 0;

    bool has(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    std::uint64_t integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;
    std::pair<double, double> band(const std::string& key) const;
    std::vector<TimeWindow> windows(const std::string& key) const;
    /// Label used in messages, e.g. "[dual_lock L]".
    std::string label() const;

    /// Values in schema order, as (key, canonical text). Unset optional keys
    /// are absent.
    std::vector<std::pair<std::string, std::string>> values;
};

struct ScenarioConfig {
    std::vector<Section> sections;
    double dt = 0.0;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> warnings;

    const Section* find(const std::string& kind, const std::string& name = "") const;
    std::vector<const Section*> all(const std::string& kind) const;
    TimeGrid grid() const { return TimeGrid(dt, n); }

    /// Canonical document with every default spelled out; parses back to an
    /// equal config.
    std::string echo() const;
};

/// "kind.name.key=value" or "kind.key=value" applied before validation.
struct Override {
    std::string path;
    std::string value;
};

ScenarioConfig parse_scenario(const std::string& text, const std::vector<Override>& overrides = {});
ScenarioConfig load_scenario(const std::filesystem::path& file,
                             const std::vector<Override>& overrides = {});

/// Seed used when neither the command line nor the document sets one.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct NamedTrace {
    std::string name;
    std::string unit;
    std::variant<RealTrace, FieldTrace> data;
};

struct NamedSpectrum {
    std::string name;
    std::string unit;
    SpectrumEstimate estimate;
};

struct AnalysisReport {
    std::string name;
    std::string kind;
    bool pass = true;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, std::string>> notes;

    double value(const std::string& key) const;
};

struct RunResult {
    ScenarioConfig config;
    std::uint64_t seed = kDefaultSeed;
    std::vector<NamedTrace> traces;
    std::vector<NamedSpectrum> spectra;
    std::vector<AnalysisReport> reports;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
    std::size_t samples = 0;

    bool all_pass() const;
    const AnalysisReport* report(const std::string& name) const;
    const NamedSpectrum* spectrum(const std::string& name) const;
};

/// Executes the document. Seed precedence: `seed_override` (command line),
/// then the [run] seed, then kDefaultSeed.
RunResult run(const ScenarioConfig& config, std::optional<std::uint64_t> seed_override = {});

struct ExportManifest {
    std::filesystem::path dir;
    std::vector<std::string> files;
};

/// Writes traces.csv, psd.csv and reports.json (each only when there is
/// something to put in it) and manifest.json.
ExportManifest export_result(const RunResult& result, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace lockbench
