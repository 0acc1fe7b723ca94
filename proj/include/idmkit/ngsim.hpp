#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "idmkit/scene.hpp"

namespace idmkit {

enum class SourceUnits { Feet, Meters };

// Column-to-axis mapping. LocalXLongitudinal follows the ingest contract
// (Local_X becomes the longitudinal x). Raw NGSIM files measure Local_Y
// along the roadway; use LocalYLongitudinal for those.
enum class AxisConvention { LocalXLongitudinal, LocalYLongitudinal };

struct IngestConfig {
  SourceUnits units = SourceUnits::Feet;
  AxisConvention axes = AxisConvention::LocalXLongitudinal;
  std::set<int> mainline_lanes = {1, 2, 3, 4, 5};
  double dt = 0.1;
  double speed_limit = 29.06;     // m/s
  double lane_width = 3.6576;     // m, used when estimating centerlines
  int heading_smooth_window = 5;  // centered moving average, frames
  // Centerline extension beyond the recorded extent, so rollouts that
  // outrun the recording still have a lookahead point.
  double lane_margin_back = 50.0;
  double lane_margin_ahead = 400.0;
  // Externally supplied centerlines override the per-lane median estimate.
  std::optional<std::vector<LaneGeometry>> lanes_override;
};

// Parses an NGSIM-style trajectory table. Requires columns Vehicle_ID,
// Frame_ID, Local_X, Local_Y, v_Vel, v_Length, v_Width, Lane_ID, Preceding,
// Space_Headway; extra columns are ignored. Throws SchemaError on a missing
// column and EmptySceneError when no mainline vehicle survives.
Scene ingest_ngsim(std::istream& csv_source, const IngestConfig& config);

enum class RemovalReason { FrameGap, WrongLead };

struct FilterReport {
  struct Removed {
    VehicleId id = kNoVehicle;
    RemovalReason reason = RemovalReason::FrameGap;
  };
  std::vector<Removed> removed;
  int ingested = 0;
  int retained = 0;
};

// Removes vehicles with frame-index gaps and vehicles whose recorded
// Preceding pointer contradicts lane occupancy at any frame. Pointers into
// removed vehicles are cleared in the surviving tracks.
std::pair<Scene, FilterReport> hygiene_filter(const Scene& scene);

// Canonical scene snapshot: self-describing columnar text in SI units.
// header_comments are echoed verbatim as leading comment lines.
void write_scene(const Scene& scene, std::ostream& out,
                 const std::vector<std::string>& header_comments = {});
Scene read_scene(std::istream& in);
Scene read_scene_file(const std::string& path);
void write_scene_file(const Scene& scene, const std::string& path,
                      const std::vector<std::string>& header_comments = {});

std::vector<LaneGeometry> read_lanes_file(const std::string& path);

}  // namespace idmkit
