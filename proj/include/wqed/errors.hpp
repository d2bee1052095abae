#pragma once

#include <stdexcept>
#include <string>

namespace wqed {

// Error taxonomy. The CLI maps these to distinct exit codes:
// ConfigError -> 2 (bad input or configuration), EngineError -> 3 (simulation or
// solver abort), StatsError -> 4 (statistics pipeline failure).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct EngineError : Error {
    using Error::Error;
};

struct StatsError : Error {
    using Error::Error;
};

}  // namespace wqed
