#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pklab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: empty fields, grid mismatches, non-finite data.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A formula was evaluated outside the hypotheses that make it meaningful.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear-solver breakdown, eigensolve failure and similar numerical faults.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Configuration rejected by the strict schema. Carries every violation found.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

/// CLI exit codes.
enum class ExitCode : int {
    success = 0,
    config_error = 2,
    numeric_failure = 3,
    acceptance_failure = 4,
};

}  // namespace pklab
