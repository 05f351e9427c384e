#pragma once

#include <stdexcept>
#include <string>

namespace cvmp {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  Ok = 0,
  Config = 1,
  Data = 2,
  Numerical = 3,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ExitCode::Config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ExitCode::Data, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
};

[[noreturn]] void throw_shape_mismatch(const std::string& context, std::size_t expected,
                                       std::size_t got);

}  // namespace cvmp
