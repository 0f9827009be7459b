#ifndef SMIDGE_ERROR_H_
#define SMIDGE_ERROR_H_

#include <stdexcept>
#include <string>

namespace smidge {

// Exit-code contract used by the CLI: 1 = usage/config, 2 = I/O, 3 = data.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : UsageError {
    explicit ConfigError(const std::string& msg) : UsageError(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or degenerate input data (parse failures, undefined statistics).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace smidge

#endif  // SMIDGE_ERROR_H_
