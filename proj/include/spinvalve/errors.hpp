#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace spinvalve {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    success = 0,
    validation = 2,
    infeasible = 3,
    numerical = 4,
};

class Error : public std::runtime_error {
 public:
    Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

 private:
    ExitCode code_;
};

/// Bad input: out-of-range parameters, unknown tags, malformed config.
class ValidationError : public Error {
 public:
    explicit ValidationError(const std::string& what) : Error(what, ExitCode::validation) {}
};

/// A requested operating point lies outside the transmission band.
class InfeasibleError : public Error {
 public:
    explicit InfeasibleError(const std::string& what) : Error(what, ExitCode::infeasible) {}
};

/// Singular systems, non-finite results, wavepackets reaching the lattice edge.
class NumericalError : public Error {
 public:
    explicit NumericalError(const std::string& what) : Error(what, ExitCode::numerical) {}
};

/// Unreadable config or unwritable output location. Reported with the validation code.
class IoError : public Error {
 public:
    explicit IoError(const std::string& what) : Error(what, ExitCode::validation) {}
};

namespace detail {

inline void require(bool condition, const std::string& what) {
    if (!condition) throw ValidationError(what);
}

inline void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) throw ValidationError(std::string(name) + " must be finite");
}

}  // namespace detail
}  // namespace spinvalve
