#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refform/model.hpp"

namespace refform {

struct SourceSpan {
  int offset = 0, length = 0;  // byte range
  int line = 1, column = 1;    // 1-based position of the range start
};

struct Diagnostic {
  SourceSpan span;
  std::string message;
};

struct ParseResult {
  std::optional<Circuit> circuit;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return circuit.has_value() && diagnostics.empty(); }
};

/// Parses the circuit text format:
///
///   circuit  := "circuit" ident "{" item* "}"
///   item     := "input" ident ";"
///             | "control" ident ";"
///             | "clock" ident spec ";"
///             | "ff" ident "clock" ident conn ";"
///             | "output" conn ";"
///   spec     := "period" int "offset" int | "edges" "[" ints "]" | "free"
///   conn     := "from" srcset | "select" ident "{" srcset ("," srcset)* "}"
///   srcset   := "{" ident ("," ident)* "}"
///
/// "//" starts a line comment. Identifiers are ASCII letters, digits and
/// underscores, starting with a letter; keywords are reserved. Errors are
/// collected with source spans; parsing recovers at item boundaries.
ParseResult parse(std::string_view text);

// Canonical text for a circuit; parse(emit(c)) is structurally equal to c.
std::string emit(const Circuit& c);

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               std::string_view filename);

}  // namespace refform
