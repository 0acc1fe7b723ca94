#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "idmkit/estimation.hpp"
#include "idmkit/knn.hpp"
#include "idmkit/rollout.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

// Mean point-wise Euclidean distance over aligned frames. By default the sum
// is divided by the number of points summed; divide_by_points=false divides
// by (points - 1) instead. Throws LengthMismatchError on unequal lengths.
double ade(const Trajectory& truth, const Trajectory& model, bool divide_by_points = true);

// Euclidean distance at the final frame.
double fde(const Trajectory& truth, const Trajectory& model);

struct EvalRecord {
  VehicleId vehicle_id = kNoVehicle;
  std::string method;
  double ade = 0.0;
  double fde = 0.0;
  bool collided_at_fault = false;
};

struct MethodStats {
  int n = 0;
  double mean_ade = 0.0;
  double se_ade = 0.0;
  double mean_fde = 0.0;
  double se_fde = 0.0;
  int collisions = 0;  // at-fault only
};

struct ReportTable {
  std::vector<std::pair<std::string, MethodStats>> rows;  // insertion-ordered
};

enum class Method { ConstVel, IdmAverage, IdmPredict, IdmOracle };

std::string method_id(Method m);       // constvel, avg, pred, oracle
std::string method_label(Method m);    // display name
Method parse_method(const std::string& id);

struct BenchmarkConfig {
  int horizon = 100;
  int observe_frames = 10;
  int k = 8;
  FeatureMask features;
  CodeConfig code;
  RolloutConfig rollout;
  IdmBounds bounds;  // oracle fit bounds
  OptConfig opt;     // oracle fit settings
  int parallelism = 1;
  bool ade_divide_by_points = true;
};

struct BenchmarkResult {
  ReportTable table;
  std::vector<EvalRecord> records;  // per vehicle and method, vehicle-id major
  std::vector<std::pair<VehicleId, std::string>> skipped;
};

// Rolls out every requested method for every eligible test vehicle. A
// vehicle that fails for any reason is excluded from every method's row, so
// all rows aggregate the identical vehicle set.
BenchmarkResult run_benchmark(const KnnStore& store, const Scene& test_scene,
                              const std::vector<Method>& methods, const BenchmarkConfig& cfg);

// IdmPredict over every non-empty subset of {nu, omega, tau}.
ReportTable ablation_driving_code(const KnnStore& store, const Scene& test_scene,
                                  const BenchmarkConfig& cfg);

// IdmPredict over several observation-window lengths.
ReportTable ablation_frames(const KnnStore& store, const Scene& test_scene,
                            const std::vector<int>& frame_counts, const BenchmarkConfig& cfg);

ReportTable aggregate_records(const std::vector<EvalRecord>& records);

void write_table_csv(const ReportTable& table, std::ostream& out,
                     const std::vector<std::string>& header_comments = {});
void write_table_markdown(const ReportTable& table, std::ostream& out);
void write_records_csv(const std::vector<EvalRecord>& records, std::ostream& out,
                       const std::vector<std::string>& header_comments = {});
std::vector<EvalRecord> read_records_csv(std::istream& in);

}  // namespace idmkit
