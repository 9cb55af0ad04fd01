#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace frbm {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotStandardError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An enumeration or conversion would exceed a hard state-space guard.
struct CapacityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed binary input; `offset` is the byte position of the problem.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::uint64_t offset)
        : std::runtime_error(msg + " at byte offset " + std::to_string(offset)),
          offset(offset) {}
    std::uint64_t offset;
};

// Bad config file content; `line` is 1-based, 0 when no line applies.
struct ConfigError : std::invalid_argument {
    ConfigError(const std::string& msg, int line)
        : std::invalid_argument(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line(line) {}
    int line;
};

}  // namespace frbm
