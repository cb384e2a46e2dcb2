#pragma once

#include <stdexcept>
#include <string>

namespace hyperscat {

// Precondition violations use std::invalid_argument / std::domain_error.
// The types below carry the categories the CLI maps onto exit codes.

/// Invalid run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical scheme failed to converge or lost its accuracy contract (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::string diagnostics = {})
      : std::runtime_error(diagnostics.empty() ? what : what + " [" + diagnostics + "]"),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// File system or parse failure tied to a path (exit code 4).
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Warnings go through a replaceable sink (stderr by default).
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace hyperscat
