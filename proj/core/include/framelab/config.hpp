#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace framelab {

// Flat key=value configuration: one `key = value` per line, '#' comments.
// Commands declare their known keys so typos fail loudly; a resolved config
// plus seed and code version is enough to reproduce a run bit for bit.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_lines(const std::vector<std::string>& lines);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Keys not in `known`, sorted.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

const char* code_version();

// manifest.txt: resolved configuration, command, seed, code version.
void write_manifest(const std::string& run_dir, const std::string& command,
                    const KeyValueConfig& resolved);
bool has_manifest(const std::string& run_dir);
KeyValueConfig read_manifest(const std::string& run_dir);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace framelab
