#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace fwa {

// Minimal TOML-style document: [section] headers, key = value lines,
// # comments. Values: integers, floats, booleans, "strings", and flat
// arrays of numbers or strings. Covers the whole scenario schema without
// pulling in a full TOML implementation.
class ConfigDoc {
public:
    using Scalar = std::variant<std::int64_t, double, bool, std::string>;
    using Array = std::vector<Scalar>;

    static ConfigDoc parse_file(const std::string& path);
    static ConfigDoc parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t dflt) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double dflt) const;
    bool get_bool(const std::string& section, const std::string& key, bool dflt) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& dflt) const;

    std::vector<double> get_double_array(const std::string& section, const std::string& key) const;
    std::vector<std::int64_t> get_int_array(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& section, const std::string& key) const;

    // Empty vector when the key is missing.
    std::vector<double> get_double_array_or_empty(const std::string& section, const std::string& key) const;
    std::vector<std::int64_t> get_int_array_or_empty(const std::string& section, const std::string& key) const;

    const std::map<std::string, std::map<std::string, Array>>& sections() const { return sections_; }

private:
    const Array* find(const std::string& section, const std::string& key) const;
    const Array& require(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, Array>> sections_;
    std::string origin_;
};

} // namespace fwa
