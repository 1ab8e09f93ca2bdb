#pragma once

#include <stdexcept>
#include <string>

namespace qsdc {

// Bad user-supplied configuration (CLI exit code 1).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime estimation failure, e.g. an empty CHSH correlation cell (CLI exit code 2).
struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsdc
