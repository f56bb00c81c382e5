#pragma once

#include <stdexcept>
#include <string>

namespace fkhull {

enum class errc {
  invalid_parameter,
  degenerate_support,
  dimension_mismatch,
  non_finite_objective,
  support_too_large,
  preimage_not_found,
  invalid_hull,
  invalid_config,
};

inline const char* to_string(errc e) {
  switch (e) {
    case errc::invalid_parameter: return "InvalidParameter";
    case errc::degenerate_support: return "DegenerateSupport";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_finite_objective: return "NonFiniteObjective";
    case errc::support_too_large: return "SupportTooLarge";
    case errc::preimage_not_found: return "PreimageNotFound";
    case errc::invalid_hull: return "InvalidHull";
    case errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

// All library failures carry a machine-readable kind next to the message.
class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

}  // namespace fkhull
