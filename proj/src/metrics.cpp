#include "idmkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "idmkit/errors.hpp"
#include "idmkit/parallel.hpp"

namespace idmkit {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string f2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double ade(const Trajectory& truth, const Trajectory& model, bool divide_by_points) {
  if (truth.size() != model.size()) {
    throw LengthMismatchError("trajectories must have equal length");
  }
  if (truth.size() == 0) throw LengthMismatchError("empty trajectories");
  double sum = 0.0;
  for (int i = 0; i < truth.size(); ++i) {
    const auto& a = truth.states[static_cast<std::size_t>(i)];
    const auto& b = model.states[static_cast<std::size_t>(i)];
    sum += std::hypot(a.x - b.x, a.y - b.y);
  }
  const int denom = divide_by_points ? truth.size() : std::max(1, truth.size() - 1);
  return sum / denom;
}

double fde(const Trajectory& truth, const Trajectory& model) {
  if (truth.size() != model.size()) {
    throw LengthMismatchError("trajectories must have equal length");
  }
  if (truth.size() == 0) throw LengthMismatchError("empty trajectories");
  const auto& a = truth.states.back();
  const auto& b = model.states.back();
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::string method_id(Method m) {
  switch (m) {
    case Method::ConstVel: return "constvel";
    case Method::IdmAverage: return "avg";
    case Method::IdmPredict: return "pred";
    case Method::IdmOracle: return "oracle";
  }
  return "?";
}

std::string method_label(Method m) {
  switch (m) {
    case Method::ConstVel: return "Const. vel";
    case Method::IdmAverage: return "IDM Ave.";
    case Method::IdmPredict: return "IDM Pred.";
    case Method::IdmOracle: return "IDM Est. (Oracle)";
  }
  return "?";
}

Method parse_method(const std::string& id) {
  if (id == "constvel") return Method::ConstVel;
  if (id == "avg") return Method::IdmAverage;
  if (id == "pred") return Method::IdmPredict;
  if (id == "oracle") return Method::IdmOracle;
  throw ConfigError("unknown method '" + id + "' (expected constvel,avg,pred,oracle)");
}

namespace {

struct VehicleEval {
  bool ok = false;
  std::string reason;
  std::vector<EvalRecord> records;
};

MethodStats stats_over(const std::vector<double>& ades, const std::vector<double>& fdes,
                       int collisions) {
  MethodStats s;
  s.n = static_cast<int>(ades.size());
  s.collisions = collisions;
  if (s.n == 0) return s;
  const auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  // Standard error with the (n-1)-denominator sample standard deviation.
  const auto se = [&](const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1)) /
           std::sqrt(static_cast<double>(v.size()));
  };
  s.mean_ade = mean(ades);
  s.se_ade = se(ades, s.mean_ade);
  s.mean_fde = mean(fdes);
  s.se_fde = se(fdes, s.mean_fde);
  return s;
}

}  // namespace

ReportTable aggregate_records(const std::vector<EvalRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalRecord*>> by_method;
  for (const auto& r : records) {
    if (!by_method.contains(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  ReportTable table;
  for (const auto& m : order) {
    std::vector<double> ades, fdes;
    int collisions = 0;
    for (const EvalRecord* r : by_method[m]) {
      ades.push_back(r->ade);
      fdes.push_back(r->fde);
      if (r->collided_at_fault) ++collisions;
    }
    table.rows.emplace_back(m, stats_over(ades, fdes, collisions));
  }
  return table;
}

BenchmarkResult run_benchmark(const KnnStore& store, const Scene& test_scene,
                              const std::vector<Method>& methods, const BenchmarkConfig& cfg) {
  const SceneIndex index(test_scene);
  std::vector<VehicleId> ids;
  for (const auto& [id, track] : test_scene.vehicles) ids.push_back(id);

  const bool need_avg = std::find(methods.begin(), methods.end(), Method::IdmAverage) != methods.end();
  const bool need_pred = std::find(methods.begin(), methods.end(), Method::IdmPredict) != methods.end();
  const bool need_oracle = std::find(methods.begin(), methods.end(), Method::IdmOracle) != methods.end();
  const IdmParams avg_params = (need_avg || need_oracle) && store.size() > 0
                                   ? store.mean_params()
                                   : IdmParams{};
  if ((need_avg || need_pred) && store.size() == 0) throw StoreError("store is empty");

  std::vector<VehicleEval> slots(ids.size());
  parallel_for(static_cast<int>(ids.size()), cfg.parallelism, [&](int i) {
    const VehicleId id = ids[static_cast<std::size_t>(i)];
    VehicleEval& slot = slots[static_cast<std::size_t>(i)];
    try {
      const Episode ep = episode_window(test_scene, index, id, cfg.horizon);
      IdmGlobals globals = cfg.opt.globals;
      globals.v0 = ep.v0;

      IdmParams pred_params;
      if (need_pred) {
        const DrivingCode code =
            extract_code(test_scene, index, id, cfg.observe_frames, cfg.features, cfg.code);
        pred_params = predict_params(store, code, cfg.k, cfg.features);
      }

      for (const Method m : methods) {
        std::unique_ptr<Controller> controller;
        switch (m) {
          case Method::ConstVel:
            controller = std::make_unique<ConstantVelocityController>();
            break;
          case Method::IdmAverage:
            controller = std::make_unique<IdmController>(avg_params, globals, ep.dt());
            break;
          case Method::IdmPredict:
            controller = std::make_unique<IdmController>(pred_params, globals, ep.dt());
            break;
          case Method::IdmOracle: {
            OptConfig opt = cfg.opt;
            opt.rollout = cfg.rollout;
            if (store.size() > 0 && !opt.mean_start.has_value()) opt.mean_start = avg_params;
            const FitResult fit = fit_idm(ep, cfg.bounds, opt);
            controller = std::make_unique<IdmController>(fit.params, globals, ep.dt());
            break;
          }
        }
        const RolloutResult r = rollout(ep, *controller, cfg.rollout);
        if (r.model_trajectory.size() != ep.truth.size()) {
          throw Error("rollout terminated early: " + r.termination_reason);
        }
        EvalRecord rec;
        rec.vehicle_id = id;
        rec.method = method_id(m);
        rec.ade = ade(ep.truth, r.model_trajectory, cfg.ade_divide_by_points);
        rec.fde = fde(ep.truth, r.model_trajectory);
        rec.collided_at_fault = r.collided && r.at_fault;
        slot.records.push_back(rec);
      }
      slot.ok = true;
    } catch (const Error& err) {
      slot.ok = false;
      slot.records.clear();  // exclude the vehicle from every method
      slot.reason = err.what();
    }
  });

  BenchmarkResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      for (auto& r : slots[i].records) result.records.push_back(std::move(r));
    } else {
      result.skipped.emplace_back(ids[i], slots[i].reason);
    }
  }
  // Aggregate rows in the requested method order.
  std::vector<EvalRecord> ordered;
  ordered.reserve(result.records.size());
  for (const Method m : methods) {
    const std::string mid = method_id(m);
    for (const auto& r : result.records) {
      if (r.method == mid) ordered.push_back(r);
    }
  }
  result.table = aggregate_records(ordered);
  return result;
}

ReportTable ablation_driving_code(const KnnStore& store, const Scene& test_scene,
                                  const BenchmarkConfig& cfg) {
  const std::vector<FeatureMask> subsets = {
      {false, true, false},  // {nu}
      {false, false, true},  // {omega}
      {true, false, false},  // {tau}
      {false, true, true},   // {nu,omega}
      {true, true, false},   // {nu,tau}
      {true, false, true},   // {omega,tau}
      {true, true, true},    // {nu,omega,tau}
  };
  ReportTable table;
  for (const FeatureMask& mask : subsets) {
    BenchmarkConfig sub = cfg;
    sub.features = mask;
    const BenchmarkResult r = run_benchmark(store, test_scene, {Method::IdmPredict}, sub);
    for (const auto& row : r.table.rows) table.rows.emplace_back(mask.label(), row.second);
  }
  return table;
}

ReportTable ablation_frames(const KnnStore& store, const Scene& test_scene,
                            const std::vector<int>& frame_counts, const BenchmarkConfig& cfg) {
  ReportTable table;
  for (int frames : frame_counts) {
    BenchmarkConfig sub = cfg;
    sub.observe_frames = frames;
    const BenchmarkResult r = run_benchmark(store, test_scene, {Method::IdmPredict}, sub);
    for (const auto& row : r.table.rows) {
      table.rows.emplace_back(std::to_string(frames), row.second);
    }
  }
  return table;
}

void write_table_csv(const ReportTable& table, std::ostream& out,
                     const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "method,n,mean_ade,se_ade,mean_fde,se_fde,at_fault_collisions\n";
  for (const auto& [method, s] : table.rows) {
    out << method << "," << s.n << "," << g17(s.mean_ade) << "," << g17(s.se_ade) << ","
        << g17(s.mean_fde) << "," << g17(s.se_fde) << "," << s.collisions << "\n";
  }
}

void write_table_markdown(const ReportTable& table, std::ostream& out) {
  out << "| Method | ADE | FDE | Collisions | n |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& [method, s] : table.rows) {
    std::string label = method;
    for (const Method m :
         {Method::ConstVel, Method::IdmAverage, Method::IdmPredict, Method::IdmOracle}) {
      if (method == method_id(m)) label = method_label(m);
    }
    out << "| " << label << " | " << f2(s.mean_ade) << " ±" << f2(s.se_ade) << " | "
        << f2(s.mean_fde) << " ±" << f2(s.se_fde) << " | " << s.collisions << " | " << s.n
        << " |\n";
  }
}

void write_records_csv(const std::vector<EvalRecord>& records, std::ostream& out,
                       const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "vehicle_id,method,ade,fde,at_fault\n";
  for (const auto& r : records) {
    out << r.vehicle_id << "," << r.method << "," << g17(r.ade) << "," << g17(r.fde) << ","
        << (r.collided_at_fault ? 1 : 0) << "\n";
  }
}

std::vector<EvalRecord> read_records_csv(std::istream& in) {
  std::vector<EvalRecord> out;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("vehicle_id,", 0) != 0) throw IoError("unexpected records header");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 5) throw IoError("malformed record at line " + std::to_string(line_no));
    EvalRecord r;
    r.vehicle_id = std::strtoll(f[0].c_str(), nullptr, 10);
    r.method = f[1];
    r.ade = std::strtod(f[2].c_str(), nullptr);
    r.fde = std::strtod(f[3].c_str(), nullptr);
    r.collided_at_fault = f[4] == "1";
    out.push_back(r);
  }
  if (!header_seen) throw IoError("empty records file");
  return out;
}

}  // namespace idmkit
