#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bitwords {

// Flat `key = value` configuration text. '#' starts a comment, blank lines are
// skipped, keys may not repeat. Key acceptance is decided by the consumer so
// unknown keys fail with the offending name and line.
struct ConfigFile {
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };
    std::vector<Entry> entries;
    std::string origin;  // file name or label, echoed in diagnostics

    static ConfigFile parse_text(const std::string& text, const std::string& origin);
    static ConfigFile parse_file(const std::string& path);

    // Rejects any entry whose key is outside `accepted`.
    void restrict_keys(const std::vector<std::string>& accepted) const;

    const Entry* find(const std::string& key) const;
};

// Strict scalar parsers; throw ValidationError naming the field.
double parse_real(const std::string& text, const std::string& field);
std::int64_t parse_int(const std::string& text, const std::string& field);
std::uint64_t parse_uint(const std::string& text, const std::string& field);

// Comma-separated unsigned integers.
std::vector<std::uint64_t> parse_uint_list(const std::string& text, const std::string& field);

// Comma-separated ints (word lengths).
std::vector<int> parse_int_list(const std::string& text, const std::string& field);

// Seed convention: a bare integer N means seeds 1..N; any comma makes the
// list explicit (a trailing comma gives a one-element list).
std::vector<std::uint64_t> parse_seeds(const std::string& text);

}  // namespace bitwords
