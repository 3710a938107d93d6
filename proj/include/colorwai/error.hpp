#pragma once

#include <stdexcept>
#include <string>

namespace colorwai {

// Bad input: maps to CLI exit code 2 and HTTP 400.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Missing resource: maps to HTTP 404.
class NotFoundError : public std::runtime_error {
 public:
  explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

// Request clashes with work in progress: maps to HTTP 409.
class ConflictError : public std::runtime_error {
 public:
  explicit ConflictError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace colorwai
