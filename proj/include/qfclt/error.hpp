#pragma once

#include <stdexcept>
#include <string>

namespace qfclt {

enum class Errc {
  domain_error,
  unsupported_inverse,
  empty_input,
  invalid_mask,
  invalid_corner,
  invalid_variance,
  not_computable,
  invalid_config,
  io_error,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the library; the code tells callers which
// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::domain_error: return "domain-error";
    case Errc::unsupported_inverse: return "unsupported-inverse";
    case Errc::empty_input: return "empty-input";
    case Errc::invalid_mask: return "invalid-mask";
    case Errc::invalid_corner: return "invalid-corner";
    case Errc::invalid_variance: return "invalid-variance";
    case Errc::not_computable: return "not-computable";
    case Errc::invalid_config: return "invalid-config";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace qfclt
