#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lockbench/scenario.hpp"

namespace lockbench::schema {

enum class ValueType {
    number,
    time,  // seconds; must be a multiple of dt
    integer,
    boolean,
    band,
    windows,
    gain,
    choice,
    text,
    field_ref,
    real_ref,
    laser_ref,
    name_list,
};

struct KeySpec {
    std::string key;
    ValueType type;
    std::string default_text;  // empty: no default
    std::vector<std::string> choices;
    bool required;
    std::string help;
};

struct Output {
    std::string name;
    bool field;
    std::string unit;
};

const std::vector<std::string>& section_kinds();
bool is_named(const std::string& kind);
/// Schema of a section; laser and analysis blocks depend on their model/kind key.
std::vector<KeySpec> keys_for(const std::string& kind, const std::map<std::string, std::string>& raw);
/// Signals a validated section produces.
std::vector<Output> outputs_of(const Section& s);

std::vector<std::string> split(std::string_view s, char sep);
bool parse_number(std::string_view text, double& out);
bool parse_integer(std::string_view text, std::uint64_t& out);
bool parse_bool(std::string_view text, bool& out);
bool parse_band(std::string_view text, std::pair<double, double>& out);
bool parse_windows(std::string_view text, std::vector<TimeWindow>& out);
bool valid_identifier(std::string_view s);
std::size_t edit_distance(std::string_view a, std::string_view b);
std::string suggest(std::string_view word, const std::vector<std::string>& options);

}  // namespace lockbench::schema
