#pragma once

#include <stdexcept>
#include <string>

namespace pmfgn {

// Base for every failure raised by the library. Messages are single-line so
// the CLI can print them verbatim as machine-parsable errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration or arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk artifacts (manifest, PGM, WAV, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmfgn
