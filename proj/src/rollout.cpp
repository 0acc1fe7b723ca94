#include "idmkit/rollout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "idmkit/errors.hpp"

namespace idmkit {

namespace {

std::array<Vec2, 4> footprint_corners(const VehicleState& s, const VehicleGeometry& g) {
  const double c = std::cos(s.psi);
  const double n = std::sin(s.psi);
  const Vec2 ex = (0.5 * g.length) * Vec2{c, n};
  const Vec2 ey = (0.5 * g.width) * Vec2{-n, c};
  const Vec2 center = s.position();
  return {center + ex + ey, center + ex - ey, center - ex + ey, center - ex - ey};
}

bool separated_on_axis(Vec2 axis, const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2& p : a) {
    const double t = dot(axis, p);
    amin = std::min(amin, t);
    amax = std::max(amax, t);
  }
  for (const Vec2& p : b) {
    const double t = dot(axis, p);
    bmin = std::min(bmin, t);
    bmax = std::max(bmax, t);
  }
  return amax < bmin || bmax < amin;
}

bool footprints_overlap(const VehicleState& sa, const VehicleGeometry& ga, const VehicleState& sb,
                        const VehicleGeometry& gb) {
  // Circumscribed-circle reject before the full axis test.
  const double reach = 0.5 * (std::hypot(ga.length, ga.width) + std::hypot(gb.length, gb.width));
  if (norm(sa.position() - sb.position()) > reach) return false;

  const auto ca = footprint_corners(sa, ga);
  const auto cb = footprint_corners(sb, gb);
  const std::array<Vec2, 4> axes = {
      Vec2{std::cos(sa.psi), std::sin(sa.psi)}, Vec2{-std::sin(sa.psi), std::cos(sa.psi)},
      Vec2{std::cos(sb.psi), std::sin(sb.psi)}, Vec2{-std::sin(sb.psi), std::cos(sb.psi)}};
  for (const Vec2& axis : axes) {
    if (separated_on_axis(axis, ca, cb)) return false;
  }
  return true;
}

const LaneGeometry* nearest_lane(const std::vector<LaneGeometry>& lanes, Vec2 pos) {
  const LaneGeometry* best = nullptr;
  double best_off = std::numeric_limits<double>::infinity();
  for (const auto& lane : lanes) {
    const double off = std::abs(project_to_lane(lane, pos).offset);
    if (off < best_off) {
      best_off = off;
      best = &lane;
    }
  }
  return best;
}

Vec2 heading_dir(double psi) { return {std::cos(psi), std::sin(psi)}; }

// Nearest replayed vehicle ahead of the model in `lane`, by centerline arc
// length. The gap runs from the model's front bumper to the lead's rear.
LeadInfo resolve_lead(const VehicleState& model, const VehicleGeometry& geom,
                      const LaneGeometry& lane, std::span<const ReplayOther> others) {
  LeadInfo lead;
  const double s_center = project_to_lane(lane, model.position()).s;
  const ReplayOther* best = nullptr;
  double best_s = std::numeric_limits<double>::infinity();
  for (const auto& other : others) {
    if (other.lane_id != lane.lane_id) continue;
    const double s_other = project_to_lane(lane, other.state.position()).s;
    if (s_other <= s_center) continue;
    if (s_other < best_s) {
      best_s = s_other;
      best = &other;
    }
  }
  if (best == nullptr) return lead;

  const Vec2 front = model.position() + (0.5 * geom.length) * heading_dir(model.psi);
  const Vec2 rear =
      best->state.position() - (0.5 * best->geom.length) * heading_dir(best->state.psi);
  lead.present = true;
  lead.id = best->id;
  lead.gap = project_to_lane(lane, rear).s - project_to_lane(lane, front).s;
  lead.v_lead = best->state.v;
  return lead;
}

}  // namespace

std::optional<CollisionHit> detect_collision(const VehicleState& model,
                                             const VehicleGeometry& model_geom,
                                             std::span<const ReplayOther> others,
                                             double lane_direction) {
  const Vec2 dir = heading_dir(lane_direction);
  for (const auto& other : others) {
    if (!footprints_overlap(model, model_geom, other.state, other.geom)) continue;
    const bool ahead = dot(other.state.position() - model.position(), dir) > 0.0;
    return CollisionHit{other.id, ahead};
  }
  return std::nullopt;
}

RolloutResult rollout(const Episode& episode, Controller& controller, const RolloutConfig& cfg) {
  const int horizon = episode.horizon();
  if (horizon < 1) throw Error("episode has no frames");
  const double dt = episode.dt();

  RolloutResult res;
  res.model_trajectory.vehicle_id = episode.vehicle_id;
  res.model_trajectory.dt = dt;
  res.model_trajectory.frames.reserve(static_cast<std::size_t>(horizon));
  res.model_trajectory.states.reserve(static_cast<std::size_t>(horizon));

  const LaneGeometry* steer_lane = episode.lane_by_id(episode.start_lane);
  VehicleState state = episode.truth.states.front();
  res.model_trajectory.frames.push_back(episode.truth.frames.front());
  res.model_trajectory.states.push_back(state);

  bool frozen = false;
  for (int k = 0; k + 1 < horizon; ++k) {
    const int frame = episode.truth.frames[static_cast<std::size_t>(k + 1)];
    if (frozen) {
      res.model_trajectory.frames.push_back(frame);
      res.model_trajectory.states.push_back(state);
      continue;
    }

    const auto others_now = std::span<const ReplayOther>(episode.others[static_cast<std::size_t>(k)]);
    const LaneGeometry* lane_now = nearest_lane(episode.lanes, state.position());
    LeadInfo lead;
    if (lane_now != nullptr) lead = resolve_lead(state, episode.geom, *lane_now, others_now);
    if (cfg.record_gaps) res.gaps.push_back(lead.present ? lead.gap : kNoLead);
    if (lead.present) lead.gap = std::max(lead.gap, cfg.min_gap);

    const Controller::Decision dec = controller.decide(k, state, lead);
    double delta = 0.0;
    if (dec.steer.has_value()) {
      delta = *dec.steer;
    } else {
      if (steer_lane == nullptr) {
        res.terminated_early = true;
        res.termination_reason = "no lane for steering";
        break;
      }
      try {
        delta = pure_pursuit_steer(state, *steer_lane, episode.geom, cfg.pursuit);
      } catch (const LaneExhaustedError&) {
        res.terminated_early = true;
        res.termination_reason = "lane exhausted";
        break;
      }
    }
    delta = std::clamp(delta, -cfg.pursuit.delta_max, cfg.pursuit.delta_max);

    const int substeps = std::max(1, cfg.substeps);
    for (int i = 0; i < substeps; ++i) {
      state = bicycle_step(state, ControlInput{dec.accel, delta}, episode.geom, dt / substeps);
    }
    res.model_trajectory.frames.push_back(frame);
    res.model_trajectory.states.push_back(state);

    const auto others_next =
        std::span<const ReplayOther>(episode.others[static_cast<std::size_t>(k + 1)]);
    const LaneGeometry* lane_next = nearest_lane(episode.lanes, state.position());
    const double fault_dir =
        lane_next != nullptr ? project_to_lane(*lane_next, state.position()).tangent : state.psi;
    if (const auto hit = detect_collision(state, episode.geom, others_next, fault_dir)) {
      res.collided = true;
      res.at_fault = hit->at_fault;
      res.collision_frame = frame;
      if (cfg.stop_on_collision) break;
      frozen = true;  // hold the collision pose so every method accumulates equal horizons
    }
  }
  return res;
}

}  // namespace idmkit
