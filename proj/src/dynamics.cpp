#include "idmkit/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "idmkit/errors.hpp"

namespace idmkit {

VehicleState bicycle_step(const VehicleState& state, const ControlInput& input,
                          const VehicleGeometry& geom, double dt) {
  const double beta =
      std::atan(geom.lr / (geom.lf + geom.lr) * std::tan(input.delta));
  VehicleState next;
  next.x = state.x + state.v * std::cos(state.psi + beta) * dt;
  next.y = state.y + state.v * std::sin(state.psi + beta) * dt;
  next.psi = normalize_angle(state.psi + state.v / geom.lr * std::sin(beta) * dt);
  next.v = std::max(0.0, state.v + input.accel * dt);
  return next;
}

double pure_pursuit_steer(const VehicleState& state, const LaneGeometry& lane,
                          const VehicleGeometry& geom, const PurePursuitConfig& cfg) {
  const LaneProjection proj = project_to_lane(lane, state.position());
  const double ld = std::max(cfg.ld_min, cfg.t_lookahead * state.v);
  const double s_target = proj.s + ld;
  if (s_target > lane_length(lane)) {
    throw LaneExhaustedError("lookahead point beyond lane centerline");
  }
  const Vec2 target = lane_point_at(lane, s_target);
  const double alpha =
      normalize_angle(std::atan2(target.y - state.y, target.x - state.x) - state.psi);
  const double delta = std::atan2(2.0 * geom.wheelbase() * std::sin(alpha), ld);
  return std::clamp(delta, -cfg.delta_max, cfg.delta_max);
}

ControlInput inverse_dynamics(const VehicleState& from, const VehicleState& to,
                              const VehicleGeometry& geom, double dt) {
  ControlInput u;
  u.accel = (to.v - from.v) / dt;
  const double dpsi = normalize_angle(to.psi - from.psi);
  if (std::abs(from.v) < 1e-9) {
    u.delta = 0.0;  // heading cannot change at zero speed
    return u;
  }
  const double sin_beta = std::clamp(dpsi * geom.lr / (from.v * dt), -1.0, 1.0);
  const double beta = std::asin(sin_beta);
  u.delta = std::atan(std::tan(beta) * (geom.lf + geom.lr) / geom.lr);
  return u;
}

}  // namespace idmkit
