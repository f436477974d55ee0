#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace contagion::config {

// Key-value configuration: `key = value` lines, '#' starts a comment.
// CLI flags are merged on top of file values via set().
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    [[nodiscard]] bool has(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

    // Canonical "key = value" text, keys sorted; input to the manifest hash.
    [[nodiscard]] std::string canonical_text() const;

    // FNV-1a hash of the canonical text, as 16 hex digits.
    [[nodiscard]] std::string hash() const;

    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace contagion::config
