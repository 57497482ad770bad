#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pha {

enum class Severity { warning, error };

inline const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

// Where a diagnostic points: line/column for text sources (1-based, 0 when
// unknown), or a JSON pointer for structured documents.
struct SourceLocation {
  int line {0};
  int column {0};
  std::string pointer;

  std::string str() const {
    if (!pointer.empty()) return pointer;
    if (line == 0) return "-";
    return std::to_string(line) + ":" + std::to_string(column);
  }
};

struct Diagnostic {
  Severity severity {Severity::error};
  SourceLocation location;
  std::string code;
  std::string message;
};

inline std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  return os << d.location.str() << ": " << to_string(d.severity) << " [" << d.code << "] "
            << d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) {
    if (d.severity == Severity::error) return true;
  }
  return false;
}

// A value or a list of errors. Warnings may accompany a value; a value is
// never present alongside an error.
template <typename T>
class Result {
 public:
  static Result success(T value, std::vector<Diagnostic> warnings = {}) {
    Result r;
    r._value.emplace(std::move(value));
    r._diagnostics = std::move(warnings);
    return r;
  }

  static Result failure(std::vector<Diagnostic> diagnostics) {
    Result r;
    r._diagnostics = std::move(diagnostics);
    return r;
  }

  bool ok() const noexcept { return _value.has_value(); }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& {
    if (!_value) throw std::logic_error("Result has no value");
    return *_value;
  }
  T&& value() && {
    if (!_value) throw std::logic_error("Result has no value");
    return std::move(*_value);
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const std::vector<Diagnostic>& diagnostics() const noexcept { return _diagnostics; }

 private:
  std::optional<T> _value;
  std::vector<Diagnostic> _diagnostics;
};

// Domain errors raised during inference.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), _code(std::move(code)) {}

  const std::string& code() const noexcept { return _code; }

 private:
  std::string _code;
};

namespace errc {
inline constexpr const char* non_ground_query = "non-ground-query";
inline constexpr const char* non_ground_assumption = "non-ground-assumption";
inline constexpr const char* undefined_posterior = "undefined-posterior";
inline constexpr const char* unknown_hypothesis = "unknown-hypothesis";
inline constexpr const char* unknown_variable = "unknown-variable";
inline constexpr const char* zero_probability_observation = "zero-probability-observation";
inline constexpr const char* budget_exceeded = "budget-exceeded";
}  // namespace errc

}  // namespace pha
