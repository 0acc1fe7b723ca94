#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "idmkit/idm.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

// Three observable behavior statistics summarizing a driver's style.
// NaN marks a dimension that is missing (no lead ever observed) or masked.
struct DrivingCode {
  double tau = std::numeric_limits<double>::quiet_NaN();    // mean lateral lane-center offset, m
  double nu = std::numeric_limits<double>::quiet_NaN();     // mean speed, m/s
  double omega = std::numeric_limits<double>::quiet_NaN();  // mean time headway, s

  std::array<double, 3> as_array() const { return {tau, nu, omega}; }
};

struct FeatureMask {
  bool tau = true;
  bool nu = true;
  bool omega = true;

  std::array<bool, 3> as_array() const { return {tau, nu, omega}; }
  int count() const { return (tau ? 1 : 0) + (nu ? 1 : 0) + (omega ? 1 : 0); }
  std::string label() const;
  // Parses comma-separated feature names, e.g. "tau,nu,omega" or "omega".
  static FeatureMask parse(const std::string& spec);
};

struct CodeConfig {
  bool nu_relative = false;  // mean approach rate to the lead instead of mean speed
  double min_speed = 0.1;    // m/s; slower frames are excluded from time headway
};

// Behavior statistics over the vehicle's first n_frames recorded frames
// (n_frames <= 0 means the whole trajectory). The lead used for the headway
// is resolved from lane occupancy, the same way the rollout resolves it.
DrivingCode extract_code(const Scene& scene, const SceneIndex& index, VehicleId vehicle_id,
                         int n_frames, const FeatureMask& mask, const CodeConfig& cfg = {});

struct KnnEntry {
  VehicleId id = kNoVehicle;
  DrivingCode code;
  IdmParams params;
};

// Immutable set of (driving code, fitted parameters) pairs with per-dimension
// standardization statistics.
class KnnStore {
 public:
  struct Standardization {
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    std::array<double, 3> stddev{1.0, 1.0, 1.0};
    std::array<bool, 3> floored{false, false, false};  // degenerate dimension
  };

  static KnnStore build(std::vector<KnnEntry> entries);

  const std::vector<KnnEntry>& entries() const { return entries_; }
  const Standardization& standardization() const { return stats_; }
  int size() const { return static_cast<int>(entries_.size()); }

  // Arithmetic mean of all stored parameters (the IDM-Average baseline).
  IdmParams mean_params() const;

  void save(std::ostream& out, const std::vector<std::string>& header_comments = {}) const;
  static KnnStore load(std::istream& in);
  void save_file(const std::string& path,
                 const std::vector<std::string>& header_comments = {}) const;
  static KnnStore load_file(const std::string& path);

 private:
  std::vector<KnnEntry> entries_;  // ascending vehicle id
  Standardization stats_;
};

// Mean parameters of the k nearest neighbors under z-scored Euclidean
// distance over the unmasked dimensions. Ties break by store order.
IdmParams predict_params(const KnnStore& store, const DrivingCode& query, int k,
                         const FeatureMask& mask);

// Bulk prediction from each test vehicle's first observe_frames frames.
// Vehicles whose code cannot be extracted are skipped with a reason.
std::map<VehicleId, IdmParams> predict_all(
    const KnnStore& store, const Scene& test_scene, int observe_frames, int k,
    const FeatureMask& mask, const CodeConfig& cfg = {},
    std::vector<std::pair<VehicleId, std::string>>* skipped = nullptr);

}  // namespace idmkit
