#include <cmath>
#include <random>

#include "doctest.h"
#include "idmkit/errors.hpp"
#include "idmkit/metrics.hpp"
#include "idmkit/rollout.hpp"
#include "synthetic.hpp"

using namespace idmkit;

namespace {

std::vector<ReplayOther> one_other(double x, double y, double psi, double len, double wid) {
  return {ReplayOther{42, VehicleState{x, y, psi, 0.0}, 1, VehicleGeometry::from_dimensions(len, wid)}};
}

}  // namespace

TEST_CASE("detect collision: disjoint unit squares") {
  const VehicleState model{0.0, 0.0, 0.0, 0.0};
  const auto others = one_other(2.0, 0.0, 0.0, 1.0, 1.0);
  CHECK_FALSE(detect_collision(model, VehicleGeometry::from_dimensions(1.0, 1.0), others, 0.0)
                  .has_value());
}

TEST_CASE("detect collision: nose into the lead's rear is at fault") {
  // Model front bumper at 2.0; lead rear bumper at 1.9.
  const VehicleState model{0.0, 0.0, 0.0, 0.0};
  const auto others = one_other(3.9, 0.0, 0.0, 4.0, 2.0);
  const auto hit =
      detect_collision(model, VehicleGeometry::from_dimensions(4.0, 2.0), others, 0.0);
  REQUIRE(hit.has_value());
  CHECK(hit->other_id == 42);
  CHECK(hit->at_fault);
}

TEST_CASE("detect collision: struck from behind is not at fault") {
  const VehicleState model{0.0, 0.0, 0.0, 0.0};
  const auto others = one_other(-3.9, 0.0, 0.0, 4.0, 2.0);
  const auto hit =
      detect_collision(model, VehicleGeometry::from_dimensions(4.0, 2.0), others, 0.0);
  REQUIRE(hit.has_value());
  CHECK_FALSE(hit->at_fault);
}

TEST_CASE("detect collision: oriented footprints need the axis test") {
  const VehicleState model{0.0, 0.0, 0.0, 0.0};
  const VehicleGeometry geom = VehicleGeometry::from_dimensions(4.0, 1.8);
  // Long thin vehicle alongside: circumscribed circles overlap, bodies do not.
  CHECK_FALSE(detect_collision(model, geom, one_other(0.0, 2.0, 0.0, 5.0, 1.0), 0.0).has_value());
  // Same vehicle angled in: its near corner enters the model's footprint.
  CHECK(detect_collision(model, geom, one_other(2.4, 2.4, M_PI / 4.0, 5.0, 1.0), 0.0).has_value());
}

TEST_CASE("rollout: constant-velocity model matches constant-speed truth") {
  const LaneGeometry lane = synth::straight_lane(1, 0.0);
  const auto truth =
      synth::scripted_vehicle(1, lane, 10.0, 100, 0.1, [](int) { return 14.0; });
  const Scene scene = synth::assemble_scene({truth}, {lane}, 0.1, 29.06);
  const Episode ep = episode_window(scene, 1, 100);

  ConstantVelocityController controller;
  const RolloutResult r = rollout(ep, controller);
  CHECK(r.model_trajectory.size() == 100);
  CHECK(ade(ep.truth, r.model_trajectory) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(r.collided);
}

TEST_CASE("rollout: replaying inverse-dynamics controls reproduces the truth") {
  // Build a wiggly ground-truth trajectory straight from the bicycle model.
  const LaneGeometry lane = synth::straight_lane(1, 0.0);
  const VehicleGeometry geom = VehicleGeometry::from_dimensions(4.6, 1.8);
  Trajectory truth;
  truth.vehicle_id = 9;
  truth.dt = 0.1;
  VehicleState s{0.0, 0.3, 0.0, 12.0};
  for (int t = 0; t < 100; ++t) {
    truth.frames.push_back(t);
    truth.states.push_back(s);
    const ControlInput u{0.5 * std::sin(0.2 * t), 0.05 * std::sin(0.13 * t)};
    s = bicycle_step(s, u, geom, 0.1);
  }

  std::vector<ControlInput> controls;
  for (int t = 0; t + 1 < 100; ++t) {
    controls.push_back(inverse_dynamics(truth.states[static_cast<std::size_t>(t)],
                                        truth.states[static_cast<std::size_t>(t + 1)], geom, 0.1));
  }

  Episode ep;
  ep.vehicle_id = 9;
  ep.truth = truth;
  ep.geom = geom;
  ep.start_lane = 1;
  ep.v0 = 29.06;
  ep.lanes = {lane};
  ep.others.resize(100);

  ReplayController controller(controls);
  const RolloutResult r = rollout(ep, controller);
  REQUIRE(r.model_trajectory.size() == 100);
  CHECK(ade(truth, r.model_trajectory) < 0.1);
}

TEST_CASE("rollout: bit-identical across repeated runs") {
  const auto cf = synth::make_car_following(17);
  const Episode ep = episode_window(cf.scene, cf.follower_id, 100);
  IdmController c1(cf.theta, IdmGlobals{29.06, 4.0}, 0.1);
  IdmController c2(cf.theta, IdmGlobals{29.06, 4.0}, 0.1);
  const RolloutResult a = rollout(ep, c1);
  const RolloutResult b = rollout(ep, c2);
  REQUIRE(a.model_trajectory.size() == b.model_trajectory.size());
  for (int i = 0; i < a.model_trajectory.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    CHECK(a.model_trajectory.states[ui].x == b.model_trajectory.states[ui].x);
    CHECK(a.model_trajectory.states[ui].y == b.model_trajectory.states[ui].y);
    CHECK(a.model_trajectory.states[ui].psi == b.model_trajectory.states[ui].psi);
    CHECK(a.model_trajectory.states[ui].v == b.model_trajectory.states[ui].v);
  }
}

TEST_CASE("rollout: generator parameters reproduce the follower exactly") {
  const auto cf = synth::make_car_following(23);
  const Episode ep = episode_window(cf.scene, cf.follower_id, 100);
  IdmController controller(cf.theta, IdmGlobals{29.06, 4.0}, 0.1);
  const RolloutResult r = rollout(ep, controller);
  REQUIRE(r.model_trajectory.size() == 100);
  CHECK(ade(ep.truth, r.model_trajectory) < 1e-9);
}

TEST_CASE("rollout: in-bounds IDM never collides at fault in sane scenes") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IdmBounds bounds;
  const auto iv = bounds.as_array();
  for (int trial = 0; trial < 40; ++trial) {
    const auto cf = synth::make_car_following(1000 + static_cast<unsigned>(trial));
    const Episode ep = episode_window(cf.scene, cf.follower_id, 100);
    std::array<double, 5> x{};
    for (std::size_t i = 0; i < 5; ++i) x[i] = iv[i].lo + u(rng) * iv[i].width();
    IdmController controller(IdmParams::from_array(x), IdmGlobals{29.06, 4.0}, 0.1);
    RolloutConfig cfg;
    cfg.record_gaps = true;
    const RolloutResult r = rollout(ep, controller, cfg);
    CHECK_FALSE(r.at_fault);
    // Resolved gap positive at every pre-collision step.
    for (double g : r.gaps) {
      if (g != kNoLead) CHECK(g > 0.0);
    }
  }
}

TEST_CASE("rollout: collision freezes the pose and keeps the horizon") {
  // Constant-velocity model behind a braking lead must rear-end it.
  const LaneGeometry lane = synth::straight_lane(1, 0.0);
  const auto lead = synth::scripted_vehicle(1, lane, 40.0, 100, 0.1, [](int t) {
    return std::max(0.0, 15.0 - 0.5 * t);  // hard, sustained braking
  });
  const auto follower =
      synth::scripted_vehicle(2, lane, 20.0, 100, 0.1, [](int) { return 15.0; });
  const Scene scene = synth::assemble_scene({lead, follower}, {lane}, 0.1, 29.06);
  const Episode ep = episode_window(scene, 2, 100);

  ConstantVelocityController controller;
  const RolloutResult frozen = rollout(ep, controller);
  REQUIRE(frozen.collided);
  CHECK(frozen.at_fault);
  REQUIRE(frozen.collision_frame.has_value());
  CHECK(frozen.model_trajectory.size() == 100);  // freeze-and-continue
  const auto& states = frozen.model_trajectory.states;
  CHECK(states.back().x == states[static_cast<std::size_t>(*frozen.collision_frame)].x);

  RolloutConfig stop;
  stop.stop_on_collision = true;
  ConstantVelocityController controller2;
  const RolloutResult truncated = rollout(ep, controller2, stop);
  CHECK(truncated.collided);
  CHECK(truncated.model_trajectory.size() == *truncated.collision_frame + 1);

  // at_fault implies collided by construction.
  CHECK((!frozen.at_fault || frozen.collided));
}

TEST_CASE("rollout: lane exhaustion terminates gracefully") {
  LaneGeometry lane = synth::straight_lane(1, 0.0, 3.6576, 0.0, 60.0);
  const auto truth = synth::scripted_vehicle(1, lane, 10.0, 100, 0.1, [](int) { return 20.0; });
  const Scene scene = synth::assemble_scene({truth}, {lane}, 0.1, 29.06);
  const Episode ep = episode_window(scene, 1, 100);
  IdmController controller(IdmParams{}, IdmGlobals{29.06, 4.0}, 0.1);
  const RolloutResult r = rollout(ep, controller);
  CHECK(r.terminated_early);
  CHECK(r.model_trajectory.size() < 100);
  CHECK(r.termination_reason == "lane exhausted");
}
