#include "idmkit/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "idmkit/errors.hpp"
#include "idmkit/geometry.hpp"

namespace idmkit {

namespace {

constexpr const char* kStoreMagic = "# idmkit-knn-store v1";
constexpr double kStdFloor = 1e-12;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct FrameLead {
  bool present = false;
  double gap = 0.0;
  double v_lead = 0.0;
};

// Same lead notion as the rollout: nearest same-lane vehicle ahead by arc
// length, gap measured front bumper to rear bumper.
FrameLead lead_at_frame(const Scene& scene, const SceneIndex& index, const VehicleTrack& track,
                        std::size_t i) {
  FrameLead out;
  const int frame = track.traj.frames[i];
  const int my_lane = track.lane_ids[i];
  const LaneGeometry* lane = scene.lane_by_id(my_lane);
  const auto arc = [&](const VehicleState& s) {
    return lane != nullptr ? project_to_lane(*lane, s.position()).s : s.x;
  };
  const VehicleState& self = track.traj.states[i];
  const double s_self = arc(self);

  const VehicleTrack* best = nullptr;
  int best_pos = 0;
  double best_s = std::numeric_limits<double>::infinity();
  for (const auto& e : index.at_frame(frame)) {
    if (e.id == track.traj.vehicle_id) continue;
    if (e.track->lane_ids[static_cast<std::size_t>(e.pos)] != my_lane) continue;
    const double s = arc(e.track->traj.states[static_cast<std::size_t>(e.pos)]);
    if (s <= s_self || s >= best_s) continue;
    best_s = s;
    best = e.track;
    best_pos = e.pos;
  }
  if (best == nullptr) return out;

  const VehicleState& ls = best->traj.states[static_cast<std::size_t>(best_pos)];
  const Vec2 front = self.position() +
                     (0.5 * track.geom.length) * Vec2{std::cos(self.psi), std::sin(self.psi)};
  const Vec2 rear =
      ls.position() - (0.5 * best->geom.length) * Vec2{std::cos(ls.psi), std::sin(ls.psi)};
  const double s_front = lane != nullptr ? project_to_lane(*lane, front).s : front.x;
  const double s_rear = lane != nullptr ? project_to_lane(*lane, rear).s : rear.x;
  out.present = true;
  out.gap = s_rear - s_front;
  out.v_lead = ls.v;
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string FeatureMask::label() const {
  std::string s = "{";
  bool first = true;
  const auto add = [&](const char* name) {
    if (!first) s += ",";
    s += name;
    first = false;
  };
  if (nu) add("nu");
  if (omega) add("omega");
  if (tau) add("tau");
  s += "}";
  return s;
}

FeatureMask FeatureMask::parse(const std::string& spec) {
  FeatureMask m{false, false, false};
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "tau") {
      m.tau = true;
    } else if (tok == "nu") {
      m.nu = true;
    } else if (tok == "omega") {
      m.omega = true;
    } else if (!tok.empty()) {
      throw ConfigError("unknown driving-code feature '" + tok + "'");
    }
  }
  if (m.count() == 0) throw ConfigError("feature mask selects no dimension");
  return m;
}

DrivingCode extract_code(const Scene& scene, const SceneIndex& index, VehicleId vehicle_id,
                         int n_frames, const FeatureMask& mask, const CodeConfig& cfg) {
  const auto it = scene.vehicles.find(vehicle_id);
  if (it == scene.vehicles.end()) throw Error("vehicle not present in scene");
  const VehicleTrack& track = it->second;
  const int total = track.traj.size();
  const int n = n_frames <= 0 ? total : n_frames;
  if (n > total) throw InsufficientLengthError("observation window longer than trajectory");
  if (n < 2) throw InsufficientLengthError("observation window needs at least 2 frames");

  std::vector<double> offsets, speeds, rel_speeds, headways;
  for (int i = 0; i < n; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    const VehicleState& s = track.traj.states[ui];
    speeds.push_back(s.v);
    if (const LaneGeometry* lane = scene.lane_by_id(track.lane_ids[ui])) {
      offsets.push_back(project_to_lane(*lane, s.position()).offset);
    }
    const FrameLead lead = lead_at_frame(scene, index, track, ui);
    if (lead.present) {
      rel_speeds.push_back(s.v - lead.v_lead);
      if (s.v > cfg.min_speed) headways.push_back(lead.gap / s.v);
    }
  }

  DrivingCode code;
  if (mask.tau && !offsets.empty()) code.tau = mean_of(offsets);
  if (mask.nu) {
    if (cfg.nu_relative && !rel_speeds.empty()) {
      code.nu = mean_of(rel_speeds);
    } else {
      code.nu = mean_of(speeds);
    }
  }
  if (mask.omega && !headways.empty()) code.omega = mean_of(headways);
  return code;
}

KnnStore KnnStore::build(std::vector<KnnEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const KnnEntry& a, const KnnEntry& b) { return a.id < b.id; });
  KnnStore store;
  store.entries_ = std::move(entries);

  for (int dim = 0; dim < 3; ++dim) {
    double sum = 0.0;
    int count = 0;
    for (const auto& e : store.entries_) {
      const double v = e.code.as_array()[static_cast<std::size_t>(dim)];
      if (std::isnan(v)) continue;
      sum += v;
      ++count;
    }
    const double mean = count > 0 ? sum / count : 0.0;
    double var = 0.0;
    for (const auto& e : store.entries_) {
      const double v = e.code.as_array()[static_cast<std::size_t>(dim)];
      if (std::isnan(v)) continue;
      var += (v - mean) * (v - mean);
    }
    double sd = count > 0 ? std::sqrt(var / count) : 0.0;
    bool floored = false;
    if (sd < kStdFloor) {
      sd = kStdFloor;
      floored = true;
    }
    store.stats_.mean[static_cast<std::size_t>(dim)] = mean;
    store.stats_.stddev[static_cast<std::size_t>(dim)] = sd;
    store.stats_.floored[static_cast<std::size_t>(dim)] = floored;
  }
  return store;
}

namespace {

IdmParams mean_params_over(const std::vector<KnnEntry>& entries, const std::vector<int>& idx) {
  std::array<double, 5> sum{0, 0, 0, 0, 0};
  for (int i : idx) {
    const auto p = entries[static_cast<std::size_t>(i)].params.as_array();
    for (std::size_t d = 0; d < 5; ++d) sum[d] += p[d];
  }
  for (std::size_t d = 0; d < 5; ++d) sum[d] /= static_cast<double>(idx.size());
  return IdmParams::from_array(sum);
}

}  // namespace

IdmParams KnnStore::mean_params() const {
  if (entries_.empty()) throw StoreError("store is empty");
  std::vector<int> all(entries_.size());
  std::iota(all.begin(), all.end(), 0);
  return mean_params_over(entries_, all);
}

IdmParams predict_params(const KnnStore& store, const DrivingCode& query, int k,
                         const FeatureMask& mask) {
  const auto& entries = store.entries();
  if (entries.empty()) throw StoreError("store is empty");
  if (k < 1) throw StoreError("k must be at least 1");
  if (k > store.size()) throw StoreError("k exceeds store size");

  const auto& stats = store.standardization();
  const auto q = query.as_array();
  const auto on = mask.as_array();
  const int n_mask = mask.count();

  std::vector<std::pair<double, int>> by_dist;
  by_dist.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto e = entries[i].code.as_array();
    double sum = 0.0;
    int avail = 0;
    for (std::size_t d = 0; d < 3; ++d) {
      if (!on[d] || std::isnan(q[d]) || std::isnan(e[d])) continue;
      const double z = (q[d] - e[d]) / stats.stddev[d];
      sum += z * z;
      ++avail;
    }
    // Distance over the available dimensions, renormalized so codes with a
    // missing headway stay comparable to complete ones.
    const double d2 = avail == 0 ? std::numeric_limits<double>::infinity()
                                 : sum * (static_cast<double>(n_mask) / avail);
    by_dist.emplace_back(d2, static_cast<int>(i));
  }
  std::partial_sort(by_dist.begin(), by_dist.begin() + k, by_dist.end());

  std::vector<int> chosen(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) chosen[static_cast<std::size_t>(i)] = by_dist[static_cast<std::size_t>(i)].second;
  std::sort(chosen.begin(), chosen.end());
  return mean_params_over(entries, chosen);
}

std::map<VehicleId, IdmParams> predict_all(
    const KnnStore& store, const Scene& test_scene, int observe_frames, int k,
    const FeatureMask& mask, const CodeConfig& cfg,
    std::vector<std::pair<VehicleId, std::string>>* skipped) {
  if (observe_frames < 2) throw ConfigError("observe_frames must be at least 2");
  const SceneIndex index(test_scene);
  std::map<VehicleId, IdmParams> out;
  for (const auto& [id, track] : test_scene.vehicles) {
    try {
      const DrivingCode code = extract_code(test_scene, index, id, observe_frames, mask, cfg);
      out.emplace(id, predict_params(store, code, k, mask));
    } catch (const Error& err) {
      if (skipped != nullptr) skipped->emplace_back(id, err.what());
    }
  }
  return out;
}

void KnnStore::save(std::ostream& out, const std::vector<std::string>& header_comments) const {
  out << kStoreMagic << "\n";
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "# columns: vehicle_id a b T d0 d1 tau nu omega\n";
  for (const auto& e : entries_) {
    const auto p = e.params.as_array();
    out << e.id;
    for (double v : p) out << " " << g17(v);
    out << " " << g17(e.code.tau) << " " << g17(e.code.nu) << " " << g17(e.code.omega) << "\n";
  }
}

KnnStore KnnStore::load(std::istream& in) {
  std::string line;
  bool magic_seen = false;
  std::vector<KnnEntry> entries;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!magic_seen) {
        if (line != kStoreMagic) throw StoreError("not an idmkit knn store (bad magic)");
        magic_seen = true;
      }
      continue;
    }
    if (!magic_seen) throw StoreError("not an idmkit knn store (missing header)");
    // strtod handles the nan sentinel, which stream extraction would reject.
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (tok.size() != 9) throw StoreError("malformed store row at line " + std::to_string(line_no));
    KnnEntry e;
    char* end = nullptr;
    e.id = std::strtoll(tok[0].c_str(), &end, 10);
    if (end == tok[0].c_str()) {
      throw StoreError("malformed store row at line " + std::to_string(line_no));
    }
    std::array<double, 8> vals{};
    for (std::size_t i = 0; i < 8; ++i) {
      end = nullptr;
      vals[i] = std::strtod(tok[i + 1].c_str(), &end);
      if (end == tok[i + 1].c_str()) {
        throw StoreError("malformed store row at line " + std::to_string(line_no));
      }
    }
    e.params = IdmParams::from_array({vals[0], vals[1], vals[2], vals[3], vals[4]});
    e.code.tau = vals[5];
    e.code.nu = vals[6];
    e.code.omega = vals[7];
    entries.push_back(e);
  }
  if (!magic_seen) throw StoreError("empty store file");
  return build(std::move(entries));
}

void KnnStore::save_file(const std::string& path,
                         const std::vector<std::string>& header_comments) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write store file " + path);
  save(out, header_comments);
}

KnnStore KnnStore::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open store file " + path);
  return load(in);
}

}  // namespace idmkit
