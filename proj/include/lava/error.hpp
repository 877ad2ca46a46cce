#pragma once

#include <stdexcept>
#include <string>

namespace lava {

// Invalid argument or violated precondition (CLI exit code 1).
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed file contents (CLI exit code 2).
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Well-formed input carrying unusable values, e.g. NaN (CLI exit code 2).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure (CLI exit code 2).
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace lava
