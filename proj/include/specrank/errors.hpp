#pragma once

#include <stdexcept>
#include <string>

namespace specrank {

/// Bad arguments or malformed inputs supplied by the caller.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// A file could not be read, parsed or written.
class FileIoError : public std::runtime_error {
 public:
  explicit FileIoError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to meet its contract.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace specrank
