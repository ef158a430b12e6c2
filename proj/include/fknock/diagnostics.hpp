#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fknock {

// Raised for malformed inputs or violated preconditions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical stage cannot produce a usable result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Collects non-fatal warnings emitted by numerical routines (ridge fallbacks,
// clipped eigenvalues, dropped components). Passing nullptr discards them.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
    bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message)
{
    if (diag != nullptr) {
        diag->warn(std::move(message));
    }
}

} // namespace fknock
