#include "idmkit/scene.hpp"

#include <algorithm>

#include "idmkit/errors.hpp"

namespace idmkit {

const LaneGeometry* Scene::lane_by_id(int lane_id) const {
  for (const auto& lane : lanes) {
    if (lane.lane_id == lane_id) return &lane;
  }
  return nullptr;
}

void Scene::update_frame_range() {
  first_frame = 0;
  last_frame = -1;
  bool any = false;
  for (const auto& [id, track] : vehicles) {
    if (track.traj.frames.empty()) continue;
    if (!any) {
      first_frame = track.traj.frames.front();
      last_frame = track.traj.frames.back();
      any = true;
    } else {
      first_frame = std::min(first_frame, track.traj.frames.front());
      last_frame = std::max(last_frame, track.traj.frames.back());
    }
  }
}

SceneIndex::SceneIndex(const Scene& scene) {
  first_ = scene.first_frame;
  const int n = std::max(0, scene.last_frame - scene.first_frame + 1);
  by_frame_.resize(static_cast<std::size_t>(n));
  // scene.vehicles is id-ordered, so per-frame entries come out id-ordered.
  for (const auto& [id, track] : scene.vehicles) {
    for (std::size_t i = 0; i < track.traj.frames.size(); ++i) {
      const int f = track.traj.frames[i];
      if (f < first_ || f - first_ >= n) continue;
      by_frame_[static_cast<std::size_t>(f - first_)].push_back(
          Entry{id, &track, static_cast<int>(i)});
    }
  }
}

std::span<const SceneIndex::Entry> SceneIndex::at_frame(int frame) const {
  const long long off = static_cast<long long>(frame) - first_;
  if (off < 0 || off >= static_cast<long long>(by_frame_.size())) return {};
  return by_frame_[static_cast<std::size_t>(off)];
}

const LaneGeometry* Episode::lane_by_id(int lane_id) const {
  for (const auto& lane : lanes) {
    if (lane.lane_id == lane_id) return &lane;
  }
  return nullptr;
}

Episode episode_window(const Scene& scene, const SceneIndex& index, VehicleId vehicle_id,
                       int horizon_frames) {
  const auto it = scene.vehicles.find(vehicle_id);
  if (it == scene.vehicles.end()) {
    throw Error("vehicle not present in scene");
  }
  const VehicleTrack& track = it->second;
  if (track.traj.size() < horizon_frames) {
    throw InsufficientLengthError("trajectory shorter than requested horizon");
  }
  for (int i = 1; i < horizon_frames; ++i) {
    if (track.traj.frames[i] != track.traj.frames[i - 1] + 1) {
      throw Error("frame gap inside episode window; run hygiene_filter first");
    }
  }

  Episode ep;
  ep.vehicle_id = vehicle_id;
  ep.geom = track.geom;
  ep.start_lane = track.lane_ids.empty() ? 0 : track.lane_ids.front();
  ep.v0 = scene.speed_limit;
  ep.lanes = scene.lanes;

  ep.truth.vehicle_id = vehicle_id;
  ep.truth.dt = scene.dt;
  ep.truth.frames.assign(track.traj.frames.begin(), track.traj.frames.begin() + horizon_frames);
  ep.truth.states.assign(track.traj.states.begin(), track.traj.states.begin() + horizon_frames);

  ep.others.resize(static_cast<std::size_t>(horizon_frames));
  const int f0 = track.traj.frames.front();
  for (int off = 0; off < horizon_frames; ++off) {
    for (const auto& e : index.at_frame(f0 + off)) {
      if (e.id == vehicle_id) continue;
      ep.others[static_cast<std::size_t>(off)].push_back(ReplayOther{
          e.id, e.track->traj.states[static_cast<std::size_t>(e.pos)],
          e.track->lane_ids[static_cast<std::size_t>(e.pos)], e.track->geom});
    }
  }
  return ep;
}

Episode episode_window(const Scene& scene, VehicleId vehicle_id, int horizon_frames) {
  return episode_window(scene, SceneIndex(scene), vehicle_id, horizon_frames);
}

}  // namespace idmkit
