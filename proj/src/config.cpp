#include "sgk/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sgk {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

// strips a trailing comment that is not inside a string
std::string strip_comment(const std::string& s)
{
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\'))
            in_str = !in_str;
        else if (s[i] == '#' && !in_str)
            return s.substr(0, i);
    }
    return s;
}

bool parse_number(const std::string& tok, double& out, bool& is_int)
{
    std::string t;
    for (char c : tok)
        if (c != '_')
            t += c;
    if (t.empty())
        return false;
    if (t == "inf" || t == "+inf")
        return out = HUGE_VAL, is_int = false, true;
    if (t == "-inf")
        return out = -HUGE_VAL, is_int = false, true;
    std::size_t pos = 0;
    try {
        out = std::stod(t, &pos);
    } catch (...) {
        return false;
    }
    if (pos != t.size())
        return false;
    is_int = t.find_first_of(".eE") == std::string::npos;
    return true;
}

}

ConfigTable ConfigTable::parse(const std::string& text, const std::string& source)
{
    ConfigTable t;
    t.source_ = source;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    auto err = [&](const std::string& m) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + m);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                err("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.find_first_of("[]. \t") != std::string::npos)
                err("unsupported section name '" + section + "'");
            if (t.data_.count(section))
                err("duplicate section [" + section + "]");
            t.data_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            err("expected key = value");
        if (section.empty())
            err("key outside of a section");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            err("empty key or value");
        for (char c : key)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
                err("invalid key '" + key + "'");
        auto& sec = t.data_[section];
        if (sec.count(key))
            err("duplicate key '" + key + "'");
        ConfigEntry e;
        e.line = lineno;
        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                err("unterminated string");
            e.value = val.substr(1, val.size() - 2);
        } else if (val == "true" || val == "false") {
            e.value = (val == "true");
        } else if (val.front() == '[') {
            if (val.back() != ']')
                err("arrays must be on one line");
            std::vector<double> arr;
            std::string body = trim(val.substr(1, val.size() - 2));
            std::stringstream ss(body);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty()) {
                    if (ss.eof())
                        break;
                    err("empty array element");
                }
                double x;
                bool is_int;
                if (!parse_number(item, x, is_int))
                    err("array elements must be numbers");
                arr.push_back(x);
            }
            e.value = arr;
        } else {
            double x;
            bool is_int;
            if (!parse_number(val, x, is_int))
                err("cannot parse value '" + val + "'");
            e.value = x;
            e.integer = is_int;
        }
        sec[key] = e;
    }
    return t;
}

ConfigTable ConfigTable::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

bool ConfigTable::has(const std::string& section, const std::string& key) const
{
    return find(section, key) != nullptr;
}

const ConfigEntry* ConfigTable::find(const std::string& section, const std::string& key) const
{
    auto s = data_.find(section);
    if (s == data_.end())
        return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void ConfigTable::fail(const std::string& section, const std::string& key, const std::string& what) const
{
    const ConfigEntry* e = find(section, key);
    throw ConfigError(source_ + ":" + std::to_string(e ? e->line : 0) + ": [" + section + "] " + key + ": " + what);
}

double ConfigTable::number(const std::string& section, const std::string& key, double def) const
{
    const ConfigEntry* e = find(section, key);
    if (!e)
        return def;
    if (auto p = std::get_if<double>(&e->value))
        return *p;
    fail(section, key, "expected a number");
}

long long ConfigTable::integer(const std::string& section, const std::string& key, long long def) const
{
    const ConfigEntry* e = find(section, key);
    if (!e)
        return def;
    auto p = std::get_if<double>(&e->value);
    if (!p || !e->integer || std::abs(*p) > 9.0e15)
        fail(section, key, "expected an integer");
    return static_cast<long long>(*p);
}

bool ConfigTable::boolean(const std::string& section, const std::string& key, bool def) const
{
    const ConfigEntry* e = find(section, key);
    if (!e)
        return def;
    if (auto p = std::get_if<bool>(&e->value))
        return *p;
    fail(section, key, "expected true or false");
}

std::string ConfigTable::string(const std::string& section, const std::string& key, const std::string& def) const
{
    const ConfigEntry* e = find(section, key);
    if (!e)
        return def;
    if (auto p = std::get_if<std::string>(&e->value))
        return *p;
    fail(section, key, "expected a string");
}

std::vector<double> ConfigTable::array(const std::string& section, const std::string& key,
                                       const std::vector<double>& def) const
{
    const ConfigEntry* e = find(section, key);
    if (!e)
        return def;
    if (auto p = std::get_if<std::vector<double>>(&e->value))
        return *p;
    if (auto p = std::get_if<double>(&e->value))
        return {*p};
    fail(section, key, "expected an array of numbers");
}

}
