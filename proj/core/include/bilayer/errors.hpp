#ifndef BILAYER_ERRORS_HPP
#define BILAYER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bilayer {

// Exit codes reported by the CLI, one per error class.
enum class ExitCode : int {
  ok = 0,
  generic = 1,
  parameter = 2,
  capacity = 3,
  integration_quality = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Invalid user-supplied parameters (lattice spec, config files, statistics preconditions).
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ExitCode::parameter, what) {}
};

// Coincident or otherwise unusable site geometry.
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(ExitCode::parameter, what) {}
};

// Filling so low that a layer ends up empty.
class DegenerateFillingError : public Error {
 public:
  explicit DegenerateFillingError(const std::string& what) : Error(ExitCode::parameter, what) {}
};

// Problem size beyond what an exact method can handle.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(ExitCode::capacity, what) {}
};

// Conservation checks failed after integration; carries diagnostics in what().
class IntegrationQualityError : public Error {
 public:
  explicit IntegrationQualityError(const std::string& what)
      : Error(ExitCode::integration_quality, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

}  // namespace bilayer

#endif
