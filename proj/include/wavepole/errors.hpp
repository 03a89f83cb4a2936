#pragma once

#include <stdexcept>
#include <string>

namespace wavepole {

// Base class for everything thrown by the library.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid physical parameters or arguments outside an operation's domain.
class domain_error : public error {
public:
  using error::error;
};

// Grid / window / sample-layout problems: the request is well formed but the
// supplied discretisation cannot support it.
class configuration_error : public error {
public:
  using error::error;
};

// An iterative procedure failed to converge or produced unusable numbers.
class numerical_error : public error {
public:
  using error::error;
};

// Operation not defined for this model kind (e.g. pointwise evaluation of a
// non-local kernel).
class unsupported_error : public error {
public:
  using error::error;
};

// Least-squares machinery rejected the data (ill-conditioned design, zero or
// sign-changing samples where a log fit was requested, ...).
class fit_error : public error {
public:
  using error::error;
};

// Complex-plane evaluation requested too close to a pole.
class near_pole_error : public numerical_error {
public:
  using numerical_error::numerical_error;
};

class io_error : public error {
public:
  using error::error;
};

} // namespace wavepole
