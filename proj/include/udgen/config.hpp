#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace udgen {

/// Flat `key = value` settings; `#` starts a comment, blank lines are
/// ignored, later assignments win.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool contains(const std::string& key) const { return values_.contains(key); }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::optional<std::string> get(const std::string& key) const;
    /// Typed lookups; throw DataError naming the key on malformed values.
    std::optional<double> get_double(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;
    std::optional<unsigned long long> get_uint(const std::string& key) const;

    /// Keys not in `known`, for reporting typos.
    std::optional<std::string> first_unknown(const std::initializer_list<std::string_view>& known) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace udgen
