#pragma once

#include "idmkit/geometry.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

struct PurePursuitConfig {
  double t_lookahead = 1.0;  // lookahead time gain, s
  double ld_min = 5.0;       // minimum lookahead distance, m
  double delta_max = 0.6;    // steering clamp, rad
};

// Kinematic bicycle transition over one Euler step of length dt.
// Speed is clamped at zero; heading is wrapped to (-pi, pi].
VehicleState bicycle_step(const VehicleState& state, const ControlInput& input,
                          const VehicleGeometry& geom, double dt);

// Lane-keeping steering toward the centerline point one lookahead distance
// ahead of the vehicle's projection. Throws LaneExhaustedError when the
// centerline ends before the lookahead point.
double pure_pursuit_steer(const VehicleState& state, const LaneGeometry& lane,
                          const VehicleGeometry& geom, const PurePursuitConfig& cfg);

// Controls that move `from` to `to` under the bicycle model. Exact when the
// pair was produced by bicycle_step; a least-error reconstruction otherwise.
ControlInput inverse_dynamics(const VehicleState& from, const VehicleState& to,
                              const VehicleGeometry& geom, double dt);

}  // namespace idmkit
