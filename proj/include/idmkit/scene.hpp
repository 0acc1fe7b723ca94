#pragma once

#include <map>
#include <span>
#include <vector>

#include "idmkit/geometry.hpp"

namespace idmkit {

using VehicleId = long long;
inline constexpr VehicleId kNoVehicle = 0;

// Physical state of one vehicle at one frame. Positions in meters,
// heading in (-pi, pi], speed in m/s (never negative on highway data).
struct VehicleState {
  double x = 0.0;    // longitudinal position
  double y = 0.0;    // lateral position
  double psi = 0.0;  // heading angle
  double v = 0.0;    // speed
  Vec2 position() const { return {x, y}; }
};

struct ControlInput {
  double accel = 0.0;  // m/s^2
  double delta = 0.0;  // steering angle, rad
};

struct VehicleGeometry {
  double length = 4.5;
  double width = 1.8;
  double lf = 1.125;  // center of mass to front axle
  double lr = 1.125;  // center of mass to rear axle

  // Axle positions are absent from trajectory data; wheelbase is taken as
  // half the vehicle length with the center of mass midway.
  static VehicleGeometry from_dimensions(double length, double width) {
    return {length, width, 0.25 * length, 0.25 * length};
  }
  double wheelbase() const { return lf + lr; }
};

struct Trajectory {
  VehicleId vehicle_id = kNoVehicle;
  std::vector<int> frames;           // recorded frame indices, ascending
  std::vector<VehicleState> states;  // parallel to frames
  double dt = 0.1;                   // frame period, s

  int size() const { return static_cast<int>(states.size()); }
  double duration() const { return size() * dt; }
  int first_frame() const { return frames.empty() ? 0 : frames.front(); }
  bool contiguous() const {
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (frames[i] != frames[i - 1] + 1) return false;
    }
    return true;
  }
};

// One vehicle inside a recorded scene. lane_ids and preceding run parallel
// to traj.frames; preceding == kNoVehicle means no recorded lead.
struct VehicleTrack {
  Trajectory traj;
  VehicleGeometry geom;
  std::vector<int> lane_ids;
  std::vector<VehicleId> preceding;
};

struct Scene {
  std::map<VehicleId, VehicleTrack> vehicles;
  std::vector<LaneGeometry> lanes;
  int first_frame = 0;
  int last_frame = -1;
  double dt = 0.1;
  double speed_limit = 29.06;  // m/s

  const LaneGeometry* lane_by_id(int lane_id) const;
  void update_frame_range();
};

// Frame -> occupants lookup, built once per scene. Entries per frame are
// ordered by vehicle id so iteration order is deterministic.
class SceneIndex {
 public:
  struct Entry {
    VehicleId id = kNoVehicle;
    const VehicleTrack* track = nullptr;
    int pos = 0;  // index into track->traj.frames
  };

  explicit SceneIndex(const Scene& scene);
  std::span<const Entry> at_frame(int frame) const;

 private:
  int first_ = 0;
  std::vector<std::vector<Entry>> by_frame_;
};

// Snapshot of one non-modeled vehicle replayed from the recording.
struct ReplayOther {
  VehicleId id = kNoVehicle;
  VehicleState state;
  int lane_id = 0;
  VehicleGeometry geom;
};

// A fixed-horizon evaluation window: the target vehicle's ground truth plus
// the replayed states of every other vehicle over the same frames.
struct Episode {
  VehicleId vehicle_id = kNoVehicle;
  Trajectory truth;
  VehicleGeometry geom;
  int start_lane = 0;
  double v0 = 29.06;  // scene speed limit
  std::vector<LaneGeometry> lanes;
  std::vector<std::vector<ReplayOther>> others;  // one vector per frame offset

  double dt() const { return truth.dt; }
  int horizon() const { return truth.size(); }
  const LaneGeometry* lane_by_id(int lane_id) const;
};

// Extracts the window starting at the vehicle's first recorded frame.
// Throws InsufficientLengthError if the vehicle has fewer frames.
Episode episode_window(const Scene& scene, const SceneIndex& index, VehicleId vehicle_id,
                       int horizon_frames);
Episode episode_window(const Scene& scene, VehicleId vehicle_id, int horizon_frames);

}  // namespace idmkit
