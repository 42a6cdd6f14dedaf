#include "framelab/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace framelab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void parse_line(KeyValueConfig& cfg, const std::string& raw, const std::string& where) {
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    auto eq = line.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument(where + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key in '" + line + "'");
    cfg.set(key, value);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    KeyValueConfig cfg;
    std::string line;
    while (std::getline(in, line)) parse_line(cfg, line, path);
    return cfg;
}

KeyValueConfig KeyValueConfig::from_lines(const std::vector<std::string>& lines) {
    KeyValueConfig cfg;
    for (const auto& line : lines) parse_line(cfg, line, "config");
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw std::invalid_argument("config key '" + key + "' is not a number: " + it->second);
    return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return static_cast<int>(get_double(key, 0.0));
}

uint64_t KeyValueConfig::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return std::strtoull(it->second.c_str(), nullptr, 10);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<std::string> KeyValueConfig::unknown_keys(
    const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [key, value] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) out.push_back(key);
    }
    return out;
}

const char* code_version() { return "framelab 0.1.0"; }

void write_manifest(const std::string& run_dir, const std::string& command,
                    const KeyValueConfig& resolved) {
    std::filesystem::create_directories(run_dir);
    std::ostringstream out;
    out << "command = " << command << "\n";
    out << "code_version = " << code_version() << "\n";
    for (const auto& [key, value] : resolved.entries()) out << key << " = " << value << "\n";
    write_text_file(run_dir + "/manifest.txt", out.str());
}

bool has_manifest(const std::string& run_dir) {
    return std::filesystem::exists(run_dir + "/manifest.txt");
}

KeyValueConfig read_manifest(const std::string& run_dir) {
    return KeyValueConfig::from_file(run_dir + "/manifest.txt");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace framelab
