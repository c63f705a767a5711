#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "capchan/error.hpp"

namespace capchan {

inline constexpr double kPi = std::numbers::pi;

/// Physical inputs of a capillary problem.
///
/// `kappa` is the capillarity constant (1/length^2): positive when the liquid
/// rests on the reference plane, negative when it hangs below it. The plate
/// half-width and the contact angle are only meaningful for boundary-value
/// problems and stay empty for plain initial-value integrations.
struct FluidParams {
  double kappa = 1.0;
  std::optional<double> half_width_a;
  std::optional<double> gamma;

  void validate() const {
    if (!std::isfinite(kappa) || kappa == 0.0) fail(ErrorCode::InvalidParams, "kappa must be finite and non-zero");
    if (half_width_a && !(*half_width_a > 0.0 && std::isfinite(*half_width_a)))
      fail(ErrorCode::InvalidParams, "half-width must be positive");
    if (gamma && !(*gamma >= 0.0 && *gamma <= kPi)) fail(ErrorCode::InvalidParams, "gamma must lie in [0, pi]");
  }

  [[nodiscard]] double a() const {
    if (!half_width_a) fail(ErrorCode::InvalidParams, "half-width required");
    return *half_width_a;
  }
  [[nodiscard]] double contact_angle() const {
    if (!gamma) fail(ErrorCode::InvalidParams, "contact angle required");
    return *gamma;
  }
};

inline void require_kappa(double kappa) {
  if (!std::isfinite(kappa) || kappa == 0.0) fail(ErrorCode::InvalidParams, "kappa must be finite and non-zero");
}

/// Capillary length 1/sqrt|kappa|, the natural length scale of every profile.
inline double capillary_length(double kappa) { return 1.0 / std::sqrt(std::abs(kappa)); }

}  // namespace capchan
