#pragma once

#include <stdexcept>
#include <string>

namespace qhd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario or tolerance file violates the documented schema. `path()` names
/// the offending field, e.g. `sorts[0].mass`.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Probability reached the periodic box edge; the run cannot represent the
/// isolated system any more.
class BoundaryLeakError : public Error {
 public:
  BoundaryLeakError(double time, double probability, const std::string& message)
      : Error(message), time_(time), probability_(probability) {}
  double time() const noexcept { return time_; }
  double probability() const noexcept { return probability_; }

 private:
  double time_;
  double probability_;
};

/// Binary snapshot file is malformed or inconsistent.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Requested closed-form quantity does not exist for this state variant.
class NoClosedFormError : public Error {
 public:
  using Error::Error;
};

}  // namespace qhd
