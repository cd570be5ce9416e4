#pragma once

#include <stdexcept>
#include <string>

namespace fgc {

// invalid parameters, malformed config or input files (CLI exit code 2)
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// malformed or incompatible serialized data
struct ParseError : ConfigError {
    explicit ParseError(const std::string& msg) : ConfigError(msg) {}
};

// a solver failed (non-finite messages, infeasible result, ...) (exit code 3)
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fgc
