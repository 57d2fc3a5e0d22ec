#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lockbench/scenario.hpp"

namespace lockbench {

namespace {

constexpr const char* kReportsSchema = "lockbench.reports/1";
constexpr const char* kManifestSchema = "lockbench.manifest/1";

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

nlohmann::ordered_json number(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

std::string traces_csv(const RunResult& r) {
    const Section* out = r.config.find("output");
    const std::size_t dec = out != nullptr ? static_cast<std::size_t>(out->integer("decimate")) : 1;
    std::string s = "t [s]";
    for (const auto& t : r.traces) {
        if (std::holds_alternative<FieldTrace>(t.data))
            s += "," + t.name + ".re [" + t.unit + "]," + t.name + ".im [" + t.unit + "]";
        else
            s += "," + t.name + " [" + t.unit + "]";
    }
    s += '\n';
    const TimeGrid g = r.config.grid();
    for (std::size_t i = 0; i < g.n(); i += dec) {
        s += format_double(g.time(i));
        for (const auto& t : r.traces) {
            if (const auto* f = std::get_if<FieldTrace>(&t.data)) {
                s += ',';
                s += format_double((*f)[i].real());
                s += ',';
                s += format_double((*f)[i].imag());
            } else {
                s += ',';
                s += format_double(std::get<RealTrace>(t.data)[i]);
            }
        }
        s += '\n';
    }
    return s;
}

std::string psd_csv(const RunResult& r) {
    // Spectra share a segment length; increment estimates lack the DC bin.
    std::size_t base = 0;
    for (std::size_t i = 0; i < r.spectra.size(); ++i)
        if (r.spectra[i].estimate.omega.size() > r.spectra[base].estimate.omega.size()) base = i;
    const auto& omega = r.spectra[base].estimate.omega;
    std::string s = "omega [rad/s]";
    for (const auto& sp : r.spectra) s += "," + sp.name + " [" + sp.unit + "]";
    s += '\n';
    for (std::size_t k = 0; k < omega.size(); ++k) {
        s += format_double(omega[k]);
        for (const auto& sp : r.spectra) {
            const std::size_t offset = omega.size() - sp.estimate.omega.size();
            s += ',';
            s += k < offset ? std::string("nan") : format_double(sp.estimate.psd[k - offset]);
        }
        s += '\n';
    }
    return s;
}

std::string reports_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["schema"] = kReportsSchema;
    j["all_pass"] = r.all_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rep : r.reports) {
        nlohmann::ordered_json e;
        e["name"] = rep.name;
        e["kind"] = rep.kind;
        e["pass"] = rep.pass;
        nlohmann::ordered_json v = nlohmann::ordered_json::object();
        for (const auto& [k, x] : rep.values) v[k] = number(x);
        e["values"] = v;
        nlohmann::ordered_json n = nlohmann::ordered_json::object();
        for (const auto& [k, x] : rep.notes) n[k] = x;
        e["notes"] = n;
        arr.push_back(std::move(e));
    }
    j["reports"] = std::move(arr);
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

std::string manifest_json(const RunResult& r, const std::vector<std::string>& files) {
    nlohmann::ordered_json j;
    j["schema"] = kManifestSchema;
    j["seed"] = r.seed;
    j["grid"] = {{"dt", r.config.dt}, {"n", r.config.n}};
    j["files"] = files;
    auto cfg = nlohmann::ordered_json::array();
    for (const auto& s : r.config.sections) {
        nlohmann::ordered_json e;
        e["kind"] = s.kind;
        e["name"] = s.name;
        nlohmann::ordered_json v = nlohmann::ordered_json::object();
        for (const auto& [k, x] : s.values) v[k] = x;
        e["values"] = v;
        cfg.push_back(std::move(e));
    }
    j["config"] = std::move(cfg);
    j["config_text"] = r.config.echo();
    return j.dump(2) + "\n";
}

}  // namespace

ExportManifest export_result(const RunResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    ExportManifest m;
    m.dir = dir;
    if (!result.traces.empty()) {
        write_file(dir / "traces.csv", traces_csv(result));
        m.files.push_back("traces.csv");
    }
    if (!result.spectra.empty()) {
        write_file(dir / "psd.csv", psd_csv(result));
        m.files.push_back("psd.csv");
    }
    if (!result.reports.empty()) {
        write_file(dir / "reports.json", reports_json(result));
        m.files.push_back("reports.json");
    }
    write_file(dir / "manifest.json", manifest_json(result, m.files));
    m.files.push_back("manifest.json");
    return m;
}

}  // namespace lockbench
