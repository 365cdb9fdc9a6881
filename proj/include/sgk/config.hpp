#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sgk {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Subset of TOML: [section] headers, key = value with value a number, a
// "string", true/false, or a flat array of numbers. '#' starts a comment.
using ConfigValue = std::variant<bool, double, std::string, std::vector<double>>;

struct ConfigEntry {
    ConfigValue value;
    int line = 0;
    bool integer = false;   // number written without '.', 'e' or 'inf'
};

class ConfigTable {
public:
    static ConfigTable parse(const std::string& text, const std::string& source = "<config>");
    static ConfigTable load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    const ConfigEntry* find(const std::string& section, const std::string& key) const;
    const std::map<std::string, std::map<std::string, ConfigEntry>>& sections() const { return data_; }
    const std::string& source() const { return source_; }

    double number(const std::string& section, const std::string& key, double def) const;
    long long integer(const std::string& section, const std::string& key, long long def) const;
    bool boolean(const std::string& section, const std::string& key, bool def) const;
    std::string string(const std::string& section, const std::string& key, const std::string& def) const;
    std::vector<double> array(const std::string& section, const std::string& key, const std::vector<double>& def) const;

private:
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const;
    std::map<std::string, std::map<std::string, ConfigEntry>> data_;
    std::string source_;
};

}
