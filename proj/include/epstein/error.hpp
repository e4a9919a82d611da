#pragma once

#include <stdexcept>
#include <string>

namespace epstein {

enum class ErrorKind {
  degenerate_basis,
  enumeration_budget,
  domain,
  range,
  divergence,
  primitivity,
  containment,
  insufficient_radius,
  not_semi_stable,
  tolerance,
  singular_transform,
  parse
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_basis: return "degenerate-basis";
    case ErrorKind::enumeration_budget: return "enumeration-budget";
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::primitivity: return "primitivity";
    case ErrorKind::containment: return "containment";
    case ErrorKind::insufficient_radius: return "insufficient-radius";
    case ErrorKind::not_semi_stable: return "not-semi-stable";
    case ErrorKind::tolerance: return "tolerance";
    case ErrorKind::singular_transform: return "singular-transform";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace epstein
