#pragma once

#include <stdexcept>
#include <string>

namespace narrex {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, configuration values or CLI usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a documented contract (bad CSV, degenerate matrix, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace narrex
