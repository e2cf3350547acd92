#pragma once

#include <stdexcept>
#include <string>

namespace srcfuse {

// Error taxonomy shared by all modules. The CLI maps each category to a
// distinct process exit code (see tools/srcfuse_main.cpp).

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values or shape mismatches caught before any work is done.
class ParameterError : public Error {
public:
  using Error::Error;
};

// Structurally valid input whose contents violate a data contract
// (e.g. a zero-norm training sample, a non-finite target).
class DataError : public Error {
public:
  using Error::Error;
};

// Malformed text input: bad token, inconsistent row length, row count mismatch.
class FormatError : public Error {
public:
  using Error::Error;
};

// A required input file or directory is missing or unreadable.
class IngestionError : public Error {
public:
  using Error::Error;
};

// Output-side failures (unwritable path, failed write).
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace srcfuse
