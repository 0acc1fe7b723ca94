#include "idmkit/idm.hpp"

#include <algorithm>
#include <cmath>

#include "idmkit/errors.hpp"

namespace idmkit {

bool IdmBounds::contains(const IdmParams& p) const {
  const auto iv = as_array();
  const auto x = p.as_array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!iv[i].contains(x[i])) return false;
  }
  return true;
}

IdmParams IdmBounds::clamp(const IdmParams& p) const {
  const auto iv = as_array();
  auto x = p.as_array();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = iv[i].clamp(x[i]);
  return IdmParams::from_array(x);
}

double desired_gap(const IdmParams& params, const IdmGlobals& globals, double v, double dv) {
  const double g = params.d0 + params.d1 * std::sqrt(v / globals.v0) + params.T_headway * v +
                   v * dv / (2.0 * std::sqrt(params.a * params.b));
  return std::max(0.0, g);
}

double idm_accel(const IdmParams& params, const IdmGlobals& globals, const IdmState& state,
                 double dt) {
  double interaction = 0.0;
  if (state.has_lead()) {
    if (state.d <= 0.0) throw InvalidGapError("gap must be positive when a lead is present");
    const double ratio = desired_gap(params, globals, state.v, state.dv) / state.d;
    interaction = ratio * ratio;
  }
  const double accel =
      params.a * (1.0 - std::pow(state.v / globals.v0, globals.phi) - interaction);
  // Euler integration must never drive the speed negative.
  return std::max(accel, -state.v / dt);
}

}  // namespace idmkit
