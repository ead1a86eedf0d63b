#include "bitwords/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile out;
    out.origin = origin;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string stripped = trim(raw);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(line) +
                                  ": expected `key = value`");
        Entry entry;
        entry.key = trim(stripped.substr(0, eq));
        entry.value = trim(stripped.substr(eq + 1));
        entry.line = line;
        if (entry.key.empty())
            throw ValidationError(origin + ":" + std::to_string(line) + ": empty key");
        for (const Entry& prev : out.entries)
            if (prev.key == entry.key)
                throw ValidationError(origin + ":" + std::to_string(line) + ": duplicate key `" +
                                      entry.key + "`");
        out.entries.push_back(std::move(entry));
    }
    return out;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

void ConfigFile::restrict_keys(const std::vector<std::string>& accepted) const {
    for (const Entry& entry : entries) {
        if (std::find(accepted.begin(), accepted.end(), entry.key) == accepted.end())
            throw ValidationError(origin + ":" + std::to_string(entry.line) +
                                  ": unknown configuration key `" + entry.key + "`");
    }
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    for (const Entry& entry : entries)
        if (entry.key == key) return &entry;
    return nullptr;
}

double parse_real(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t.empty()) throw ValidationError(field + ": empty value");
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(field + ": not a real number: `" + t + "`");
    }
}

std::int64_t parse_int(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ValidationError(field + ": not an integer: `" + t + "`");
    return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ValidationError(field + ": not a non-negative integer: `" + t + "`");
    return v;
}

namespace {

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char ch : text) {
        if (ch == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    out.push_back(current);
    return out;
}

}  // namespace

std::vector<std::uint64_t> parse_uint_list(const std::string& text, const std::string& field) {
    std::vector<std::uint64_t> out;
    for (const std::string& token : split_commas(text)) {
        const std::string t = trim(token);
        if (t.empty()) continue;
        out.push_back(parse_uint(t, field));
    }
    if (out.empty()) throw ValidationError(field + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
    std::vector<int> out;
    for (const std::string& token : split_commas(text)) {
        const std::string t = trim(token);
        if (t.empty()) continue;
        const std::int64_t v = parse_int(t, field);
        if (v < 1 || v > 1000000) throw ValidationError(field + ": out of range: " + t);
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ValidationError(field + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    if (text.find(',') == std::string::npos) {
        const std::uint64_t n = parse_uint(text, "seeds");
        if (n == 0 || n > 100000) throw ValidationError("seeds: count must lie in [1, 100000]");
        std::vector<std::uint64_t> out(n);
        for (std::uint64_t i = 0; i < n; ++i) out[i] = i + 1;
        return out;
    }
    return parse_uint_list(text, "seeds");
}

}  // namespace bitwords
