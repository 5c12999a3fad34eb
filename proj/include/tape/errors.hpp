// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tape {

// Invalid user-supplied configuration (bad flag value, violated bound).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken API precondition between components (shape mismatch, missing data).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Index or coordinate outside its valid domain.
struct RangeError : std::out_of_range {
    explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

// Filesystem failure (unwritable path, failed write).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tape
