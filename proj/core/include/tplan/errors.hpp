#pragma once
#include <stdexcept>
#include <string>

namespace tplan {

// Bad input files or schema violations. The CLI maps this to exit code 2.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Semantically invalid data discovered after parsing. Exit code 2 as well.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver stopped on an iteration/time/node limit without a usable answer. Exit code 3.
struct SolverLimit : std::runtime_error {
    explicit SolverLimit(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant failures. Exit code 4.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace tplan
