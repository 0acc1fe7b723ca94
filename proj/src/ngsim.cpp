#include "idmkit/ngsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "idmkit/errors.hpp"

namespace idmkit {

namespace {

constexpr double kFeetToMeters = 0.3048;
constexpr const char* kSceneMagic = "# idmkit-scene v1";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

double parse_double(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) {
    throw SchemaError("non-numeric field '" + s + "' at line " + std::to_string(line_no));
  }
  return v;
}

long long parse_ll(const std::string& s, int line_no) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str()) {
    throw SchemaError("non-integer field '" + s + "' at line " + std::to_string(line_no));
  }
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Forward-difference headings with a centered circular-mean smoother.
// Quantized NGSIM positions otherwise produce heading chatter.
std::vector<double> derive_headings(const std::vector<VehicleState>& states, int window) {
  const std::size_t n = states.size();
  std::vector<double> raw(n, 0.0);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const double dx = states[t + 1].x - states[t].x;
    const double dy = states[t + 1].y - states[t].y;
    if (std::hypot(dx, dy) < 1e-9) {
      raw[t] = t > 0 ? raw[t - 1] : 0.0;  // stationary: hold previous heading
    } else {
      raw[t] = std::atan2(dy, dx);
    }
  }
  if (n >= 2) raw[n - 1] = raw[n - 2];

  const int half = std::max(0, window / 2);
  std::vector<double> smooth(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double sx = 0.0, sy = 0.0;
    const std::size_t lo = t >= static_cast<std::size_t>(half) ? t - half : 0;
    const std::size_t hi = std::min(n - 1, t + half);
    for (std::size_t i = lo; i <= hi; ++i) {
      sx += std::cos(raw[i]);
      sy += std::sin(raw[i]);
    }
    smooth[t] = (sx == 0.0 && sy == 0.0) ? raw[t] : std::atan2(sy, sx);
  }
  return smooth;
}

}  // namespace

Scene ingest_ngsim(std::istream& csv_source, const IngestConfig& config) {
  std::string line;
  if (!std::getline(csv_source, line)) throw SchemaError("empty input");
  const auto header = split_csv(line);

  const std::vector<std::string> required = {"Vehicle_ID", "Frame_ID",  "Local_X",
                                             "Local_Y",    "v_Vel",     "v_Length",
                                             "v_Width",    "Lane_ID",   "Preceding",
                                             "Space_Headway"};
  std::unordered_map<std::string, std::size_t> col;
  for (const auto& name : required) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (iequals(header[i], name)) {
        col[name] = i;
        found = true;
        break;
      }
    }
    if (!found) throw SchemaError("missing required column " + name);
  }

  struct Row {
    int frame;
    double x, y, v, len, wid;
    int lane;
    VehicleId prec;
  };
  std::map<VehicleId, std::vector<Row>> rows;

  const double unit = config.units == SourceUnits::Feet ? kFeetToMeters : 1.0;
  int line_no = 1;
  while (std::getline(csv_source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() < header.size()) {
      throw SchemaError("short row at line " + std::to_string(line_no));
    }
    const int lane = static_cast<int>(parse_ll(f[col["Lane_ID"]], line_no));
    if (!config.mainline_lanes.contains(lane)) continue;  // auxiliary-lane data removed
    Row r;
    r.frame = static_cast<int>(parse_ll(f[col["Frame_ID"]], line_no));
    const double lx = parse_double(f[col["Local_X"]], line_no) * unit;
    const double ly = parse_double(f[col["Local_Y"]], line_no) * unit;
    if (config.axes == AxisConvention::LocalXLongitudinal) {
      r.x = lx;
      r.y = ly;
    } else {
      r.x = ly;
      r.y = lx;
    }
    r.v = parse_double(f[col["v_Vel"]], line_no) * unit;
    r.len = parse_double(f[col["v_Length"]], line_no) * unit;
    r.wid = parse_double(f[col["v_Width"]], line_no) * unit;
    r.lane = lane;
    r.prec = parse_ll(f[col["Preceding"]], line_no);
    rows[parse_ll(f[col["Vehicle_ID"]], line_no)].push_back(r);
  }

  Scene scene;
  scene.dt = config.dt;
  scene.speed_limit = config.speed_limit;

  for (auto& [id, vrows] : rows) {
    std::stable_sort(vrows.begin(), vrows.end(),
                     [](const Row& a, const Row& b) { return a.frame < b.frame; });
    // Keep the first occurrence of a duplicated frame.
    vrows.erase(std::unique(vrows.begin(), vrows.end(),
                            [](const Row& a, const Row& b) { return a.frame == b.frame; }),
                vrows.end());
    if (vrows.size() < 2) continue;  // heading underivable from a single sample

    VehicleTrack track;
    track.traj.vehicle_id = id;
    track.traj.dt = config.dt;
    track.geom = VehicleGeometry::from_dimensions(vrows.front().len, vrows.front().wid);
    for (const Row& r : vrows) {
      track.traj.frames.push_back(r.frame);
      track.traj.states.push_back(VehicleState{r.x, r.y, 0.0, std::max(0.0, r.v)});
      track.lane_ids.push_back(r.lane);
      track.preceding.push_back(r.prec);
    }
    const auto psi = derive_headings(track.traj.states, config.heading_smooth_window);
    for (std::size_t i = 0; i < psi.size(); ++i) track.traj.states[i].psi = psi[i];
    scene.vehicles.emplace(id, std::move(track));
  }

  if (scene.vehicles.empty()) {
    throw EmptySceneError("no mainline vehicles after lane filtering");
  }

  // Clear Preceding pointers that reference vehicles outside the scene.
  for (auto& [id, track] : scene.vehicles) {
    for (auto& p : track.preceding) {
      if (p != kNoVehicle && !scene.vehicles.contains(p)) p = kNoVehicle;
    }
  }

  if (config.lanes_override.has_value()) {
    scene.lanes = *config.lanes_override;
  } else {
    // Straight centerline per lane at the median lateral position, extended
    // beyond the recorded extent.
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    std::map<int, std::vector<double>> lateral;
    for (const auto& [id, track] : scene.vehicles) {
      for (std::size_t i = 0; i < track.traj.states.size(); ++i) {
        x_min = std::min(x_min, track.traj.states[i].x);
        x_max = std::max(x_max, track.traj.states[i].x);
        lateral[track.lane_ids[i]].push_back(track.traj.states[i].y);
      }
    }
    for (auto& [lane_id, ys] : lateral) {
      LaneGeometry lane;
      lane.lane_id = lane_id;
      lane.width = config.lane_width;
      const double y = median(std::move(ys));
      lane.centerline = {{x_min - config.lane_margin_back, y},
                         {x_max + config.lane_margin_ahead, y}};
      scene.lanes.push_back(lane);
    }
  }

  scene.update_frame_range();
  return scene;
}

namespace {

// A recorded lead is consistent when it is the nearest or second-nearest
// same-lane vehicle ahead ("one swap" tolerance); behind or absent means
// the recording is blind to the true vehicle in front.
bool lead_pointer_consistent(const Scene& scene, const SceneIndex& index,
                             const VehicleTrack& track, std::size_t i) {
  const VehicleId p = track.preceding[i];
  if (p == kNoVehicle) return true;
  const int frame = track.traj.frames[i];
  const int my_lane = track.lane_ids[i];
  const LaneGeometry* lane = scene.lane_by_id(my_lane);

  const auto arc = [&](const VehicleState& s) {
    return lane != nullptr ? project_to_lane(*lane, s.position()).s : s.x;
  };
  const double s_self = arc(track.traj.states[i]);

  struct Ahead {
    double s;
    VehicleId id;
  };
  std::vector<Ahead> ahead;
  for (const auto& e : index.at_frame(frame)) {
    if (e.id == track.traj.vehicle_id) continue;
    if (e.track->lane_ids[static_cast<std::size_t>(e.pos)] != my_lane) continue;
    const double s = arc(e.track->traj.states[static_cast<std::size_t>(e.pos)]);
    if (s <= s_self) continue;
    ahead.push_back({s, e.id});
  }
  std::sort(ahead.begin(), ahead.end(), [](const Ahead& a, const Ahead& b) {
    return a.s != b.s ? a.s < b.s : a.id < b.id;
  });
  for (std::size_t k = 0; k < ahead.size() && k < 2; ++k) {
    if (ahead[k].id == p) return true;
  }
  return false;
}

}  // namespace

std::pair<Scene, FilterReport> hygiene_filter(const Scene& scene) {
  FilterReport report;
  report.ingested = static_cast<int>(scene.vehicles.size());

  const SceneIndex index(scene);
  std::unordered_set<VehicleId> removed;

  for (const auto& [id, track] : scene.vehicles) {
    if (!track.traj.contiguous()) {
      removed.insert(id);
      report.removed.push_back({id, RemovalReason::FrameGap});
    }
  }
  for (const auto& [id, track] : scene.vehicles) {
    if (removed.contains(id)) continue;
    for (std::size_t i = 0; i < track.preceding.size(); ++i) {
      if (!lead_pointer_consistent(scene, index, track, i)) {
        removed.insert(id);
        report.removed.push_back({id, RemovalReason::WrongLead});
        break;
      }
    }
  }

  Scene out;
  out.lanes = scene.lanes;
  out.dt = scene.dt;
  out.speed_limit = scene.speed_limit;
  for (const auto& [id, track] : scene.vehicles) {
    if (removed.contains(id)) continue;
    VehicleTrack copy = track;
    for (auto& p : copy.preceding) {
      if (p != kNoVehicle && removed.contains(p)) p = kNoVehicle;
    }
    out.vehicles.emplace(id, std::move(copy));
  }
  out.update_frame_range();
  report.retained = static_cast<int>(out.vehicles.size());
  return {std::move(out), report};
}

void write_scene(const Scene& scene, std::ostream& out,
                 const std::vector<std::string>& header_comments) {
  out << kSceneMagic << "\n";
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "# columns: vehicle frame x y psi v lane preceding\n";
  out << "dt " << g17(scene.dt) << "\n";
  out << "v0 " << g17(scene.speed_limit) << "\n";
  for (const auto& lane : scene.lanes) {
    out << "lane " << lane.lane_id << " " << g17(lane.width) << " " << lane.centerline.size();
    for (const auto& p : lane.centerline) out << " " << g17(p.x) << " " << g17(p.y);
    out << "\n";
  }
  for (const auto& [id, track] : scene.vehicles) {
    out << "veh " << id << " " << g17(track.geom.length) << " " << g17(track.geom.width) << "\n";
  }
  for (const auto& [id, track] : scene.vehicles) {
    for (std::size_t i = 0; i < track.traj.frames.size(); ++i) {
      const VehicleState& s = track.traj.states[i];
      out << id << " " << track.traj.frames[i] << " " << g17(s.x) << " " << g17(s.y) << " "
          << g17(s.psi) << " " << g17(s.v) << " " << track.lane_ids[i] << " " << track.preceding[i]
          << "\n";
    }
  }
}

Scene read_scene(std::istream& in) {
  std::string line;
  bool magic_seen = false;
  Scene scene;
  std::map<VehicleId, VehicleGeometry> geoms;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      if (!magic_seen) {
        if (t != kSceneMagic) throw IoError("not an idmkit scene file (bad magic)");
        magic_seen = true;
      }
      continue;
    }
    if (!magic_seen) throw IoError("not an idmkit scene file (missing header)");
    std::istringstream ss(t);
    std::string tok;
    ss >> tok;
    if (tok == "dt") {
      ss >> scene.dt;
    } else if (tok == "v0") {
      ss >> scene.speed_limit;
    } else if (tok == "lane") {
      LaneGeometry lane;
      std::size_t npts = 0;
      ss >> lane.lane_id >> lane.width >> npts;
      for (std::size_t i = 0; i < npts; ++i) {
        Vec2 p;
        ss >> p.x >> p.y;
        lane.centerline.push_back(p);
      }
      if (!ss) throw IoError("malformed lane line " + std::to_string(line_no));
      scene.lanes.push_back(lane);
    } else if (tok == "veh") {
      VehicleId id;
      double len, wid;
      ss >> id >> len >> wid;
      if (!ss) throw IoError("malformed veh line " + std::to_string(line_no));
      geoms[id] = VehicleGeometry::from_dimensions(len, wid);
    } else {
      VehicleId id = parse_ll(tok, line_no);
      int frame, lane_id;
      VehicleState s;
      VehicleId prec;
      ss >> frame >> s.x >> s.y >> s.psi >> s.v >> lane_id >> prec;
      if (!ss) throw IoError("malformed data row at line " + std::to_string(line_no));
      auto it = scene.vehicles.find(id);
      if (it == scene.vehicles.end()) {
        const auto git = geoms.find(id);
        if (git == geoms.end()) {
          throw IoError("data row before veh declaration at line " + std::to_string(line_no));
        }
        VehicleTrack track;
        track.traj.vehicle_id = id;
        track.traj.dt = scene.dt;
        track.geom = git->second;
        it = scene.vehicles.emplace(id, std::move(track)).first;
      }
      VehicleTrack& track = it->second;
      if (!track.traj.frames.empty() && frame <= track.traj.frames.back()) {
        throw IoError("out-of-order frame at line " + std::to_string(line_no));
      }
      track.traj.frames.push_back(frame);
      track.traj.states.push_back(s);
      track.lane_ids.push_back(lane_id);
      track.preceding.push_back(prec);
    }
  }
  if (!magic_seen) throw IoError("empty scene file");
  for (auto& [id, track] : scene.vehicles) track.traj.dt = scene.dt;
  scene.update_frame_range();
  return scene;
}

Scene read_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  return read_scene(in);
}

void write_scene_file(const Scene& scene, const std::string& path,
                      const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file " + path);
  write_scene(scene, out, header_comments);
}

std::vector<LaneGeometry> read_lanes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lanes file " + path);
  std::vector<LaneGeometry> lanes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::string tok;
    ss >> tok;
    if (tok != "lane") throw IoError("expected 'lane' at line " + std::to_string(line_no));
    LaneGeometry lane;
    std::size_t npts = 0;
    ss >> lane.lane_id >> lane.width >> npts;
    for (std::size_t i = 0; i < npts; ++i) {
      Vec2 p;
      ss >> p.x >> p.y;
      lane.centerline.push_back(p);
    }
    if (!ss) throw IoError("malformed lane line " + std::to_string(line_no));
    lanes.push_back(lane);
  }
  return lanes;
}

}  // namespace idmkit
