#pragma once

#include <stdexcept>
#include <string>

namespace splatgrad {

// Error taxonomy used across the library. All derive from std::runtime_error
// so callers can catch broadly; the CLI maps any of these to exit code 1.

struct ParameterError : std::runtime_error {
    explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// A point landed at non-positive camera depth. Carries the offending index.
struct ProjectionError : std::runtime_error {
    ProjectionError(std::size_t point_index, const std::string& msg)
        : std::runtime_error(msg), index(point_index) {}
    std::size_t index;
};

struct DegenerateCloudError : std::runtime_error {
    explicit DegenerateCloudError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures carry a 1-based line number when one is known (0 otherwise).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg, std::size_t line_number = 0)
        : std::runtime_error(msg), line(line_number) {}
    std::size_t line;
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// An input violated a documented precondition (e.g. negative values fed to
// normalize_and_suppress).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitError : std::runtime_error {
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace splatgrad
