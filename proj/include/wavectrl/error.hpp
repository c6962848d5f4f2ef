#pragma once

#include <stdexcept>
#include <string>

namespace wavectrl {

/// Bad user input: parameters, configuration, file contents.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear solve or factorization breakdown.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WAVECTRL_REQUIRE(cond, msg)                 \
  do {                                              \
    if (!(cond)) throw ::wavectrl::InvalidArgument(msg); \
  } while (false)

}  // namespace wavectrl
