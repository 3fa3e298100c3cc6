#include "rbmltt/diagnostic.hpp"

namespace rbm {

std::string SourceSpan::str() const {
  std::string s = file.empty() ? "<input>" : file;
  if (!known()) return s;
  s += ":" + std::to_string(line) + ":" + std::to_string(col);
  return s;
}

std::string Diagnostic::str() const {
  std::string s = span.str() + ": ";
  s += severity == Severity::Error ? "error" : "warning";
  s += " [" + code + "] " + message;
  return s;
}

}  // namespace rbm
