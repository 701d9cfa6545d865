#ifndef DISPATCH_ERRORS_HPP
#define DISPATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dispatch {

// Bad input data: malformed files, broken invariants, inconsistent topology.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation outside a function's domain (state outside [0,1], time outside the series).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Demand cannot be met by the available capacity at some time.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double t_hours, double shortfall_kw)
      : std::runtime_error(what), time_hours(t_hours), shortfall_kw(shortfall_kw) {}
  double time_hours;
  double shortfall_kw;
};

// A numerical routine produced a non-finite value or failed to converge.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dispatch

#endif
