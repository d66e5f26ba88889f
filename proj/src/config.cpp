#include "fwa/config.hpp"

#include "fwa/common.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fwa {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

ConfigDoc::Scalar parse_scalar(const std::string& raw, const std::string& where) {
    std::string tok = trim(raw);
    if (tok.empty()) throw ConfigError("empty value at " + where);
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            throw ConfigError("unterminated string at " + where);
        return tok.substr(1, tok.size() - 2);
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    // Integer first, then float.
    {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc() && p == tok.data() + tok.size()) return iv;
    }
    {
        double dv = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
        if (ec == std::errc() && p == tok.data() + tok.size()) return dv;
    }
    throw ConfigError("cannot parse value '" + tok + "' at " + where);
}

ConfigDoc::Array parse_value(const std::string& raw, const std::string& where) {
    std::string tok = trim(raw);
    if (!tok.empty() && tok.front() == '[') {
        if (tok.back() != ']') throw ConfigError("unterminated array at " + where);
        ConfigDoc::Array arr;
        std::string inner = tok.substr(1, tok.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char c : inner) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, where));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, where));
        return arr;
    }
    return {parse_scalar(tok, where)};
}

double scalar_as_double(const ConfigDoc::Scalar& s, const std::string& where) {
    if (std::holds_alternative<double>(s)) return std::get<double>(s);
    if (std::holds_alternative<std::int64_t>(s)) return static_cast<double>(std::get<std::int64_t>(s));
    throw ConfigError("expected number at " + where);
}

std::int64_t scalar_as_int(const ConfigDoc::Scalar& s, const std::string& where) {
    if (std::holds_alternative<std::int64_t>(s)) return std::get<std::int64_t>(s);
    throw ConfigError("expected integer at " + where);
}

} // namespace

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

ConfigDoc ConfigDoc::parse_string(const std::string& text, const std::string& origin) {
    ConfigDoc doc;
    doc.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = origin + ":" + std::to_string(lineno);
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header at " + where);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name at " + where);
            doc.sections_[section]; // materialize even when empty
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value' at " + where);
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key at " + where);
        doc.sections_[section][key] = parse_value(line.substr(eq + 1), where);
    }
    return doc;
}

const ConfigDoc::Array* ConfigDoc::find(const std::string& section, const std::string& key) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    return &kit->second;
}

const ConfigDoc::Array& ConfigDoc::require(const std::string& section, const std::string& key) const {
    const Array* a = find(section, key);
    if (a == nullptr)
        throw ConfigError("missing config key [" + section + "] " + key + " in " + origin_);
    return *a;
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::int64_t ConfigDoc::get_int(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    return scalar_as_int(a.at(0), "[" + section + "] " + key);
}

std::int64_t ConfigDoc::get_int(const std::string& section, const std::string& key, std::int64_t dflt) const {
    return has(section, key) ? get_int(section, key) : dflt;
}

double ConfigDoc::get_double(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    return scalar_as_double(a.at(0), "[" + section + "] " + key);
}

double ConfigDoc::get_double(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? get_double(section, key) : dflt;
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key, bool dflt) const {
    const Array* a = find(section, key);
    if (a == nullptr) return dflt;
    if (!std::holds_alternative<bool>(a->at(0)))
        throw ConfigError("expected boolean at [" + section + "] " + key);
    return std::get<bool>(a->at(0));
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    if (!std::holds_alternative<std::string>(a.at(0)))
        throw ConfigError("expected string at [" + section + "] " + key);
    return std::get<std::string>(a.at(0));
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key, const std::string& dflt) const {
    return has(section, key) ? get_string(section, key) : dflt;
}

std::vector<double> ConfigDoc::get_double_array(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& s : a) out.push_back(scalar_as_double(s, "[" + section + "] " + key));
    return out;
}

std::vector<std::int64_t> ConfigDoc::get_int_array(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    std::vector<std::int64_t> out;
    out.reserve(a.size());
    for (const auto& s : a) out.push_back(scalar_as_int(s, "[" + section + "] " + key));
    return out;
}

std::vector<std::string> ConfigDoc::get_string_array(const std::string& section, const std::string& key) const {
    const Array& a = require(section, key);
    std::vector<std::string> out;
    out.reserve(a.size());
    for (const auto& s : a) {
        if (!std::holds_alternative<std::string>(s))
            throw ConfigError("expected string array at [" + section + "] " + key);
        out.push_back(std::get<std::string>(s));
    }
    return out;
}

std::vector<double> ConfigDoc::get_double_array_or_empty(const std::string& section, const std::string& key) const {
    return has(section, key) ? get_double_array(section, key) : std::vector<double>{};
}

std::vector<std::int64_t> ConfigDoc::get_int_array_or_empty(const std::string& section, const std::string& key) const {
    return has(section, key) ? get_int_array(section, key) : std::vector<std::int64_t>{};
}

} // namespace fwa
