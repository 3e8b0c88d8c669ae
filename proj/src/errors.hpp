#pragma once

#include <stdexcept>
#include <string>

namespace gnno {

// Bad invocation: unknown flags, missing config keys, invalid combinations.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data and artifacts.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gnno
