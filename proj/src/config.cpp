#include "udgen/config.hpp"

#include "udgen/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace udgen {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(const std::optional<std::string>& text, const std::string& key, const char* kind) {
    if (!text) return std::nullopt;
    T value{};
    const auto* begin = text->data();
    const auto* end = begin + text->size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw DataError("config key '" + key + "': expected " + kind + ", got '" + *text + "'");
    }
    return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
        if (key.empty()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        config.values_[key] = trim(line.substr(eq + 1));
    }
    return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
    return parse_number<double>(get(key), key, "a number");
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
    return parse_number<long long>(get(key), key, "an integer");
}

std::optional<unsigned long long> KeyValueConfig::get_uint(const std::string& key) const {
    return parse_number<unsigned long long>(get(key), key, "a non-negative integer");
}

std::optional<std::string> KeyValueConfig::first_unknown(const std::initializer_list<std::string_view>& known) const {
    for (const auto& [key, value] : values_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) return key;
    }
    return std::nullopt;
}

}  // namespace udgen
