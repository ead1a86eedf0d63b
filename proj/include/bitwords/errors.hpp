#pragma once

#include <stdexcept>
#include <string>

namespace bitwords {

// Rejected input or specification. CLI exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Resource or range guard tripped on an otherwise valid request. CLI exit code 2.
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// Broken internal invariant. CLI exit code 3.
[[noreturn]] inline void internal_fail(const std::string& what) {
    throw std::logic_error("internal invariant violated: " + what);
}

inline void internal_check(bool ok, const char* what) {
    if (!ok) internal_fail(what);
}

}  // namespace bitwords
