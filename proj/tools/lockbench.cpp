#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>

#include "lockbench/scenario.hpp"
#include "lockbench/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace lockbench;

namespace {

void print_nested(const std::exception& e, int depth = 0) {
    std::cerr << std::string(static_cast<std::size_t>(depth) * 2, ' ') << e.what() << '\n';
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        print_nested(inner, depth + 1);
    }
}

fs::path output_dir(const std::string& cli_out, const ScenarioConfig& cfg) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("LOCKBENCH_OUT_DIR"); env != nullptr && *env != '\0') return env;
    if (const Section* out = cfg.find("output"); out != nullptr && out->has("dir"))
        return out->text("dir");
    return "lockbench-out";
}

void summarize(const RunResult& r, std::ostream& os) {
    for (const auto& rep : r.reports) {
        os << (rep.pass ? "PASS " : "FAIL ") << rep.kind << ' ' << rep.name;
        for (const auto& [k, v] : rep.values) os << ' ' << k << '=' << format_double(v);
        os << '\n';
    }
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
}

std::vector<Override> parse_overrides(const std::vector<std::string>& sets) {
    std::vector<Override> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects path=value, got '" + s + "'");
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

int run_once(const fs::path& config, const std::vector<Override>& overrides,
             std::optional<std::uint64_t> seed, const fs::path& out, bool echo) {
    const ScenarioConfig cfg = load_scenario(config, overrides);
    if (echo) {
        std::cout << cfg.echo();
        return 0;
    }
    const RunResult r = run(cfg, seed);
    const ExportManifest m = export_result(r, out);
    summarize(r, std::cout);
    std::cout << "wrote " << m.files.size() << " files to " << m.dir.string() << " (" << r.samples
              << " samples, " << format_double(r.wall_seconds) << " s, kernels "
              << simd::kernels().name << ")\n";
    return r.all_pass() ? 0 : 1;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    return std::equal(std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>(),
                      std::istreambuf_iterator<char>(fb), std::istreambuf_iterator<char>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate and analyse phase-locked laser networks"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    bool echo = false;

    auto* run_cmd = app.add_subcommand("run", "Run one scenario and export the results");
    run_cmd->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "Master seed (overrides [run] seed)");
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_option("--set", sets, "Override a key, kind.name.key=value")->take_all();
    run_cmd->add_flag("--echo", echo, "Print the validated scenario with defaults and exit");

    std::string param;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario once per value of one key");
    sweep_cmd->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--param", param, "path=v1,v2,...")->required();
    sweep_cmd->add_option("--seed", seed, "Master seed");
    sweep_cmd->add_option("--out", out, "Output directory");

    std::string left, right;
    auto* cmp_cmd = app.add_subcommand("compare", "Check that two output directories are byte-identical");
    cmp_cmd->add_option("first", left)->required()->check(CLI::ExistingDirectory);
    cmp_cmd->add_option("second", right)->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto overrides = parse_overrides(sets);
            const fs::path dir = output_dir(out, load_scenario(config, overrides));
            return run_once(config, overrides, seed, dir, echo);
        }
        if (*sweep_cmd) {
            const auto eq = param.find('=');
            if (eq == std::string::npos) throw ConfigError("--param expects path=v1,v2,...");
            const std::string path = param.substr(0, eq);
            std::vector<std::string> values;
            std::string cur;
            for (char c : param.substr(eq + 1)) {
                if (c == ',') {
                    values.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            values.push_back(cur);
            const fs::path base = output_dir(out, load_scenario(config));
            int status = 0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::cout << "== " << path << " = " << values[i] << '\n';
                const fs::path dir = base / ("run" + std::to_string(i));
                status |= run_once(config, {{path, values[i]}}, seed, dir, false);
            }
            return status;
        }
        if (*cmp_cmd) {
            std::vector<std::string> names;
            for (const auto& e : fs::directory_iterator(left)) names.push_back(e.path().filename().string());
            for (const auto& e : fs::directory_iterator(right)) names.push_back(e.path().filename().string());
            std::sort(names.begin(), names.end());
            names.erase(std::unique(names.begin(), names.end()), names.end());
            int status = 0;
            for (const auto& n : names) {
                const bool same = same_bytes(fs::path(left) / n, fs::path(right) / n);
                std::cout << (same ? "same    " : "DIFFERS ") << n << '\n';
                if (!same) status = 1;
            }
            return status;
        }
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        print_nested(e);
        return 3;
    }
    return 0;
}
