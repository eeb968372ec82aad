#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qato {

/// Problem file could not be parsed. Carries line/column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Problem parsed but violates one or more invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid problem:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Equilibrium solve failed (singular / indefinite stiffness, CG stall).
class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// QUBO solver failure (size cap, remote transport, malformed response).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RemoteError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace qato
