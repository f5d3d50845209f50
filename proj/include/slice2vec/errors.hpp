#pragma once

#include <stdexcept>
#include <string>

namespace s2v {

// Error categories map 1:1 onto CLI exit codes (usage=1, data=2, numeric=3).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace s2v
