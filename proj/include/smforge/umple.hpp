#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/ir.hpp"

namespace smforge {

enum class Severity { kWarning, kError };

struct ParseDiagnostic {
  std::size_t line = 1;
  Severity severity = Severity::kWarning;
  std::string message;

  std::string to_string() const;
};

struct UmpleDocument {
  std::string source_text;
  std::optional<StateMachine> machine;
  std::vector<ParseDiagnostic> diagnostics;

  std::size_t error_count() const;
  std::size_t warning_count() const;
};

enum class ParseMode { kStrict, kLenient };

class ParseFailed : public std::runtime_error {
 public:
  explicit ParseFailed(std::vector<ParseDiagnostic> diagnostics);
  const std::vector<ParseDiagnostic>& diagnostics() const {
    return diagnostics_;
  }

 private:
  std::vector<ParseDiagnostic> diagnostics_;
};

class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Renders the machine as
///
///   class <Name> {
///     sm {
///       <State> {
///         <event> [<guard>] / { a; b; } -> <Target>;
///         H
///         <Sub> { ... }
///         ||
///         <Sub2> { ... }
///       }
///     }
///   }
///
/// Each state's outgoing transitions sit in its own block; the initial state
/// of every region is emitted first. Two-space indentation, LF endings.
std::string emit_umple(const StateMachine& sm);

/// Strict: the whole text must follow the subset grammar; any error throws
/// ParseFailed. Lenient: strips markdown fences and prose, skips bad
/// statements with warnings, never throws.
UmpleDocument parse_umple(std::string_view text, ParseMode mode);

}  // namespace smforge
