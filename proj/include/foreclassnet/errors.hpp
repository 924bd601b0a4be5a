#ifndef FORECLASSNET_ERRORS_HPP
#define FORECLASSNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fcn {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shapes do not conform for the requested operation.
class dimension_error : public error {
 public:
  explicit dimension_error(const std::string& msg) : error(msg) {}
};

/// A value lies outside an operation's mathematical domain (log of a
/// non-positive number, non-positive temperature, ...).
class domain_error : public error {
 public:
  explicit domain_error(const std::string& msg) : error(msg) {}
};

/// An API precondition was violated by the caller.
class contract_error : public error {
 public:
  explicit contract_error(const std::string& msg) : error(msg) {}
};

/// NaN or Inf appeared where a finite value is required.
class numeric_error : public error {
 public:
  explicit numeric_error(const std::string& msg) : error(msg) {}
};

/// Bad configuration: unknown key, unknown scenario, missing value.
class config_error : public error {
 public:
  explicit config_error(const std::string& msg) : error(msg) {}
};

/// File parsing or serialization failure.
class io_error : public error {
 public:
  explicit io_error(const std::string& msg) : error(msg) {}
};

/// A simulated recursion left the representable range.
class divergence_error : public error {
 public:
  explicit divergence_error(const std::string& msg) : error(msg) {}
};

}  // namespace fcn

#endif  // FORECLASSNET_ERRORS_HPP
