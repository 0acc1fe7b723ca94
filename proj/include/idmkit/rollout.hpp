#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idmkit/dynamics.hpp"
#include "idmkit/idm.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

// Lead vehicle as resolved from current lane occupancy, not from the
// recorded Preceding pointer (the model's position diverges from the data).
struct LeadInfo {
  bool present = false;
  VehicleId id = kNoVehicle;
  double gap = kNoLead;  // lead rear bumper minus model front bumper, arc length
  double v_lead = 0.0;
};

// Per-step policy for the modeled vehicle. A null steer means "hold the
// lane": the simulator applies pure pursuit on the episode's initial lane.
class Controller {
 public:
  struct Decision {
    double accel = 0.0;
    std::optional<double> steer;
  };

  virtual ~Controller() = default;
  virtual Decision decide(int step, const VehicleState& state, const LeadInfo& lead) = 0;
};

class IdmController : public Controller {
 public:
  IdmController(const IdmParams& params, const IdmGlobals& globals, double dt)
      : params_(params), globals_(globals), dt_(dt) {}

  Decision decide(int, const VehicleState& state, const LeadInfo& lead) override {
    IdmState s{state.v, lead.present ? state.v - lead.v_lead : 0.0,
               lead.present ? lead.gap : kNoLead};
    return {idm_accel(params_, globals_, s, dt_), std::nullopt};
  }

  const IdmParams& params() const { return params_; }

 private:
  IdmParams params_;
  IdmGlobals globals_;
  double dt_;
};

// Zero input action: no acceleration, no steering.
class ConstantVelocityController : public Controller {
 public:
  Decision decide(int, const VehicleState&, const LeadInfo&) override { return {0.0, 0.0}; }
};

// Plays back a fixed control sequence (one input per step).
class ReplayController : public Controller {
 public:
  explicit ReplayController(std::vector<ControlInput> controls) : controls_(std::move(controls)) {}

  Decision decide(int step, const VehicleState&, const LeadInfo&) override {
    if (step < 0 || step >= static_cast<int>(controls_.size())) return {0.0, 0.0};
    const ControlInput& u = controls_[static_cast<std::size_t>(step)];
    return {u.accel, u.delta};
  }

 private:
  std::vector<ControlInput> controls_;
};

struct RolloutConfig {
  PurePursuitConfig pursuit;
  int substeps = 1;               // Euler substeps per frame
  bool stop_on_collision = false; // default: freeze pose, keep accumulating frames
  double min_gap = 0.1;           // floor fed to IDM when bumpers nearly touch
  bool record_gaps = false;
};

struct RolloutResult {
  Trajectory model_trajectory;
  bool collided = false;
  bool at_fault = false;
  std::optional<int> collision_frame;
  bool terminated_early = false;
  std::string termination_reason;
  std::vector<double> gaps;  // per-step resolved gap, when record_gaps is set
};

struct CollisionHit {
  VehicleId other_id = kNoVehicle;
  bool at_fault = false;
};

// Oriented-rectangle overlap test (separating axis) of the model footprint
// against every replayed footprint, in ascending id order. at_fault is true
// iff the struck vehicle's center lies ahead of the model's center along
// lane_direction.
std::optional<CollisionHit> detect_collision(const VehicleState& model,
                                             const VehicleGeometry& model_geom,
                                             std::span<const ReplayOther> others,
                                             double lane_direction);

RolloutResult rollout(const Episode& episode, Controller& controller,
                      const RolloutConfig& cfg = {});

}  // namespace idmkit
