#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace rbm {

struct SourceSpan {
  std::string file;
  std::uint32_t line = 0;  // 1-based; 0 means unknown
  std::uint32_t col = 0;
  std::uint32_t end_line = 0;
  std::uint32_t end_col = 0;

  bool known() const { return line != 0; }
  std::string str() const;
};

enum class Severity : std::uint8_t { Error, Warning };

struct Diagnostic {
  std::string code;  // stable identifier, e.g. E-TYPE-MISMATCH
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string message;

  std::string str() const;
};

/// A checker error; carries the diagnostic that describes it.
class CheckError : public std::runtime_error {
 public:
  explicit CheckError(Diagnostic d) : std::runtime_error(d.str()), diag(std::move(d)) {}
  Diagnostic diag;
};

struct Term;
/// Source locations of elaborated core nodes, keyed by node identity.
using SpanMap = std::unordered_map<const Term*, SourceSpan>;

}  // namespace rbm
