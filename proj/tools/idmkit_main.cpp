#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "idmkit/errors.hpp"
#include "idmkit/estimation.hpp"
#include "idmkit/knn.hpp"
#include "idmkit/metrics.hpp"
#include "idmkit/ngsim.hpp"
#include "idmkit/risk.hpp"
#include "idmkit/rollout.hpp"
#include "json.hpp"

namespace {

using idmkit::Error;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Effective configuration of one run: echoed into artifact headers and
// hashed so outputs are traceable to their settings.
class RunStamp {
 public:
  void put(const std::string& key, const std::string& value) { kv_.emplace_back(key, value); }
  void put(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    kv_.emplace_back(key, buf);
  }
  void put(const std::string& key, long long value) { kv_.emplace_back(key, std::to_string(value)); }

  std::vector<std::string> header() const {
    std::string all;
    for (const auto& [k, v] : kv_) all += k + "=" + v + "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(all)));
    std::vector<std::string> lines = {std::string("config-hash ") + hash};
    for (const auto& [k, v] : kv_) lines.push_back(k + " " + v);
    return lines;
  }

  void log(const std::string& subcommand) const {
    const auto lines = header();
    std::cerr << "idmkit " << subcommand << " " << lines.front() << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> kv_;
};

std::set<int> parse_lane_set(const std::string& spec) {
  std::set<int> lanes;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dots = tok.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(tok.substr(0, dots));
      const int hi = std::stoi(tok.substr(dots + 2));
      for (int l = lo; l <= hi; ++l) lanes.insert(l);
    } else if (!tok.empty()) {
      lanes.insert(std::stoi(tok));
    }
  }
  if (lanes.empty()) throw idmkit::ConfigError("empty lane set '" + spec + "'");
  return lanes;
}

json parse_json_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw idmkit::IoError("cannot open json file " + arg);
  return json::parse(in);
}

idmkit::IdmParams params_from_json(const json& j) {
  idmkit::IdmParams p;
  p.a = j.value("a", p.a);
  p.b = j.value("b", p.b);
  p.T_headway = j.contains("T") ? j["T"].get<double>() : j.value("T_headway", p.T_headway);
  p.d0 = j.value("d0", p.d0);
  p.d1 = j.value("d1", p.d1);
  return p;
}

idmkit::EllipseGaussian ellipse_from_json(const json& j) {
  idmkit::EllipseGaussian e;
  e.mu = {j.value("x", 0.0), j.value("y", 0.0)};
  e.tau_rot = j.value("psi", j.value("heading", 0.0));
  if (j.contains("L") && j.contains("W")) {
    e.L = j["L"].get<double>();
    e.W = j["W"].get<double>();
  } else if (j.contains("length") && j.contains("width")) {
    const double hl = 0.5 * j["length"].get<double>();
    const double hw = 0.5 * j["width"].get<double>();
    e.L = hl * hl;
    e.W = hw * hw;
  } else {
    throw idmkit::ConfigError("ellipse json needs L/W or length/width");
  }
  return e;
}

idmkit::IdmBounds read_bounds_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw idmkit::IoError("cannot open bounds file " + path);
  idmkit::IdmBounds bounds;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string name;
    double lo, hi;
    if (!(ss >> name)) continue;
    if (name[0] == '#') continue;
    if (!(ss >> lo >> hi)) throw idmkit::ConfigError("malformed bounds line: " + line);
    if (name == "a") bounds.a = {lo, hi};
    else if (name == "b") bounds.b = {lo, hi};
    else if (name == "T") bounds.T_headway = {lo, hi};
    else if (name == "d0") bounds.d0 = {lo, hi};
    else if (name == "d1") bounds.d1 = {lo, hi};
    else throw idmkit::ConfigError("unknown bounds key '" + name + "'");
  }
  return bounds;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOpts {
  long long seed = 0;
  int jobs = 1;
};

int cmd_ingest(const std::string& input, const std::string& units, const std::string& lanes,
               const std::string& axes, const std::string& lanes_file, bool hygiene,
               const std::string& filter_report, double v0, double dt, const std::string& out,
               const CommonOpts& common) {
  idmkit::IngestConfig cfg;
  if (units == "feet") cfg.units = idmkit::SourceUnits::Feet;
  else if (units == "meters") cfg.units = idmkit::SourceUnits::Meters;
  else throw idmkit::ConfigError("units must be feet or meters");
  if (axes == "xy") cfg.axes = idmkit::AxisConvention::LocalXLongitudinal;
  else if (axes == "yx") cfg.axes = idmkit::AxisConvention::LocalYLongitudinal;
  else throw idmkit::ConfigError("axes must be xy or yx");
  cfg.mainline_lanes = parse_lane_set(lanes);
  cfg.speed_limit = v0;
  cfg.dt = dt;
  if (!lanes_file.empty()) cfg.lanes_override = idmkit::read_lanes_file(lanes_file);

  RunStamp stamp;
  stamp.put("subcommand", std::string("ingest"));
  stamp.put("units", units);
  stamp.put("axes", axes);
  stamp.put("lanes", lanes);
  stamp.put("hygiene", std::string(hygiene ? "1" : "0"));
  stamp.put("v0", v0);
  stamp.put("dt", dt);
  stamp.put("seed", common.seed);
  stamp.log("ingest");

  std::ifstream in(input);
  if (!in) throw idmkit::IoError("cannot open input " + input);
  idmkit::Scene scene = ingest_ngsim(in, cfg);
  std::cerr << "ingested " << scene.vehicles.size() << " vehicles\n";

  if (hygiene) {
    auto [filtered, report] = idmkit::hygiene_filter(scene);
    std::cerr << "hygiene: retained " << report.retained << " of " << report.ingested << " ("
              << report.removed.size() << " removed)\n";
    if (!filter_report.empty()) {
      std::ofstream fr(filter_report);
      if (!fr) throw idmkit::IoError("cannot write filter report " + filter_report);
      fr << "vehicle_id,reason\n";
      for (const auto& r : report.removed) {
        fr << r.id << ","
           << (r.reason == idmkit::RemovalReason::FrameGap ? "frame_gap" : "wrong_lead") << "\n";
      }
    }
    scene = std::move(filtered);
  }
  idmkit::write_scene_file(scene, out, stamp.header());
  return 0;
}

int cmd_estimate(const std::string& scene_path, const std::string& bounds_path, int restarts,
                 int horizon, const std::string& out, const CommonOpts& common) {
  const idmkit::Scene scene = idmkit::read_scene_file(scene_path);
  idmkit::IdmBounds bounds;
  if (!bounds_path.empty()) bounds = read_bounds_file(bounds_path);
  idmkit::OptConfig opt;
  opt.restarts = restarts;

  RunStamp stamp;
  stamp.put("subcommand", std::string("estimate"));
  stamp.put("restarts", static_cast<long long>(restarts));
  stamp.put("horizon", static_cast<long long>(horizon));
  stamp.put("bounds.a", bounds.a.lo);
  stamp.put("bounds.a_hi", bounds.a.hi);
  stamp.put("bounds.b", bounds.b.lo);
  stamp.put("bounds.b_hi", bounds.b.hi);
  stamp.put("bounds.T", bounds.T_headway.lo);
  stamp.put("bounds.T_hi", bounds.T_headway.hi);
  stamp.put("bounds.d0_hi", bounds.d0.hi);
  stamp.put("bounds.d1_hi", bounds.d1.hi);
  stamp.put("seed", common.seed);
  stamp.put("jobs", static_cast<long long>(common.jobs));
  stamp.log("estimate");

  idmkit::TrainingFitReport report;
  const idmkit::KnnStore store =
      fit_training_set(scene, bounds, opt, horizon, idmkit::CodeConfig{}, &report, common.jobs);
  std::cerr << "fitted " << store.size() << " vehicles, skipped " << report.skipped.size() << "\n";
  store.save_file(out, stamp.header());
  return 0;
}

int cmd_predict(const std::string& store_path, const std::string& scene_path, int frames, int k,
                const std::string& features, const std::string& out, const CommonOpts& common) {
  const idmkit::KnnStore store = idmkit::KnnStore::load_file(store_path);
  const idmkit::Scene scene = idmkit::read_scene_file(scene_path);
  const idmkit::FeatureMask mask = idmkit::FeatureMask::parse(features);

  RunStamp stamp;
  stamp.put("subcommand", std::string("predict"));
  stamp.put("frames", static_cast<long long>(frames));
  stamp.put("k", static_cast<long long>(k));
  stamp.put("features", mask.label());
  stamp.put("seed", common.seed);
  stamp.log("predict");

  std::vector<std::pair<idmkit::VehicleId, std::string>> skipped;
  const auto params = predict_all(store, scene, frames, k, mask, idmkit::CodeConfig{}, &skipped);
  std::cerr << "predicted " << params.size() << " vehicles, skipped " << skipped.size() << "\n";

  std::ofstream os(out);
  if (!os) throw idmkit::IoError("cannot write params file " + out);
  os << "# idmkit-params v1\n";
  for (const auto& line : stamp.header()) os << "# " << line << "\n";
  os << "# columns: vehicle_id a b T d0 d1\n";
  for (const auto& [id, p] : params) {
    os << id << " " << g17(p.a) << " " << g17(p.b) << " " << g17(p.T_headway) << " " << g17(p.d0)
       << " " << g17(p.d1) << "\n";
  }
  return 0;
}

int cmd_rollout(const std::string& scene_path, long long vehicle, const std::string& controller,
                const std::string& params_json, int horizon, const std::string& out,
                const CommonOpts& common) {
  const idmkit::Scene scene = idmkit::read_scene_file(scene_path);
  const idmkit::Episode ep = idmkit::episode_window(scene, vehicle, horizon);

  RunStamp stamp;
  stamp.put("subcommand", std::string("rollout"));
  stamp.put("vehicle", vehicle);
  stamp.put("controller", controller);
  stamp.put("horizon", static_cast<long long>(horizon));
  stamp.put("seed", common.seed);
  stamp.log("rollout");

  std::unique_ptr<idmkit::Controller> ctl;
  if (controller == "constvel") {
    ctl = std::make_unique<idmkit::ConstantVelocityController>();
  } else if (controller == "idm") {
    idmkit::IdmParams p;
    if (!params_json.empty()) p = params_from_json(parse_json_arg(params_json));
    ctl = std::make_unique<idmkit::IdmController>(p, idmkit::IdmGlobals{ep.v0, 4.0}, ep.dt());
  } else {
    throw idmkit::ConfigError("controller must be idm or constvel");
  }

  const idmkit::RolloutResult r = idmkit::rollout(ep, *ctl);
  std::ofstream os(out);
  if (!os) throw idmkit::IoError("cannot write trajectory file " + out);
  os << "# idmkit-trajectory v1\n";
  for (const auto& line : stamp.header()) os << "# " << line << "\n";
  os << "# collided " << (r.collided ? 1 : 0) << " at_fault " << (r.at_fault ? 1 : 0);
  if (r.collision_frame.has_value()) os << " collision_frame " << *r.collision_frame;
  if (r.terminated_early) os << " terminated_early " << r.termination_reason;
  os << "\n# columns: frame x y psi v\n";
  for (int i = 0; i < r.model_trajectory.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto& s = r.model_trajectory.states[ui];
    os << r.model_trajectory.frames[ui] << " " << g17(s.x) << " " << g17(s.y) << " " << g17(s.psi)
       << " " << g17(s.v) << "\n";
  }
  std::cerr << "rollout: " << r.model_trajectory.size() << " frames"
            << (r.collided ? ", collided" : "") << "\n";
  return 0;
}

int cmd_evaluate(const std::string& store_path, const std::string& test_path,
                 const std::string& methods_spec, int horizon, int frames, int k,
                 const std::string& features, const std::string& ablation,
                 const std::string& frames_list, const std::string& out,
                 const std::string& records_path, const CommonOpts& common) {
  const idmkit::KnnStore store = idmkit::KnnStore::load_file(store_path);
  const idmkit::Scene scene = idmkit::read_scene_file(test_path);

  idmkit::BenchmarkConfig cfg;
  cfg.horizon = horizon;
  cfg.observe_frames = frames;
  cfg.k = k;
  cfg.features = idmkit::FeatureMask::parse(features);
  cfg.parallelism = common.jobs;

  RunStamp stamp;
  stamp.put("subcommand", std::string("evaluate"));
  stamp.put("methods", methods_spec);
  stamp.put("horizon", static_cast<long long>(horizon));
  stamp.put("frames", static_cast<long long>(frames));
  stamp.put("k", static_cast<long long>(k));
  stamp.put("features", cfg.features.label());
  stamp.put("ablation", ablation);
  stamp.put("seed", common.seed);
  stamp.put("jobs", static_cast<long long>(common.jobs));
  stamp.log("evaluate");

  idmkit::ReportTable table;
  if (ablation == "none") {
    std::vector<idmkit::Method> methods;
    std::stringstream ss(methods_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) methods.push_back(idmkit::parse_method(tok));
    }
    if (methods.empty()) throw idmkit::ConfigError("no methods requested");
    const idmkit::BenchmarkResult result = run_benchmark(store, scene, methods, cfg);
    table = result.table;
    std::cerr << "evaluated " << result.records.size() << " rollouts, skipped "
              << result.skipped.size() << " vehicles\n";
    if (!records_path.empty()) {
      std::ofstream rs(records_path);
      if (!rs) throw idmkit::IoError("cannot write records file " + records_path);
      write_records_csv(result.records, rs, stamp.header());
    }
  } else if (ablation == "codes") {
    table = ablation_driving_code(store, scene, cfg);
  } else if (ablation == "frames") {
    std::vector<int> counts;
    std::stringstream ss(frames_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) counts.push_back(std::stoi(tok));
    }
    if (counts.empty()) throw idmkit::ConfigError("empty --frames-list");
    table = ablation_frames(store, scene, counts, cfg);
  } else {
    throw idmkit::ConfigError("ablation must be none, codes or frames");
  }

  std::ofstream os(out);
  if (!os) throw idmkit::IoError("cannot write report " + out);
  write_table_csv(table, os, stamp.header());
  write_table_markdown(table, std::cerr);
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& format,
               const std::string& out) {
  std::ifstream in(records_path);
  if (!in) throw idmkit::IoError("cannot open records file " + records_path);
  const auto records = idmkit::read_records_csv(in);
  const idmkit::ReportTable table = aggregate_records(records);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw idmkit::IoError("cannot write report " + out);
    os = &file;
  }
  if (format == "md") {
    write_table_markdown(table, *os);
  } else if (format == "csv") {
    write_table_csv(table, *os);
  } else {
    throw idmkit::ConfigError("format must be md or csv");
  }
  return 0;
}

int cmd_risk(const std::string& ego_json, const std::string& other_json) {
  const idmkit::EllipseGaussian ego = ellipse_from_json(parse_json_arg(ego_json));
  const idmkit::EllipseGaussian other = ellipse_from_json(parse_json_arg(other_json));
  std::cout << g17(idmkit::gaussian_overlap_risk(ego, other)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idmkit: driver-behavior modeling over recorded highway traffic"};
  app.require_subcommand(1);
  app.set_config("--config", "", "configuration file; flags override file values");

  CommonOpts common;
  app.add_option("--seed", common.seed, "run seed, logged for reproducibility")
      ->envname("IDMKIT_SEED");
  app.add_option("--jobs", common.jobs, "parallel evaluation degree")->envname("IDMKIT_JOBS");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse an NGSIM-style CSV into a scene snapshot");
  std::string in_input, in_units = "feet", in_lanes = "1..5", in_axes = "xy";
  std::string in_lanes_file, in_filter_report, in_out;
  bool in_hygiene = true;
  double in_v0 = 29.06, in_dt = 0.1;
  ingest->add_option("--input", in_input)->required();
  ingest->add_option("--units", in_units, "feet|meters");
  ingest->add_option("--lanes", in_lanes, "mainline lanes, e.g. 1..5 or 1,2,3");
  ingest->add_option("--axes", in_axes, "xy: Local_X is longitudinal; yx: Local_Y is");
  ingest->add_option("--lanes-file", in_lanes_file, "externally supplied centerlines");
  ingest->add_flag("--hygiene,!--no-hygiene", in_hygiene, "apply the data hygiene filter");
  ingest->add_option("--filter-report", in_filter_report, "write removed-vehicle report CSV");
  ingest->add_option("--v0", in_v0, "speed limit, m/s");
  ingest->add_option("--dt", in_dt, "frame period, s");
  ingest->add_option("--out", in_out)->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "fit per-vehicle parameters on a scene");
  std::string es_scene, es_bounds, es_out;
  int es_restarts = 5, es_horizon = 100;
  estimate->add_option("--scene", es_scene)->required();
  estimate->add_option("--bounds", es_bounds, "bounds file: lines '<name> <lo> <hi>'");
  estimate->add_option("--restarts", es_restarts);
  estimate->add_option("--horizon", es_horizon);
  estimate->add_option("--out", es_out)->required();

  // predict
  auto* predict = app.add_subcommand("predict", "KNN parameter prediction from driving codes");
  std::string pr_store, pr_scene, pr_features = "tau,nu,omega", pr_out;
  int pr_frames = 10, pr_k = 8;
  predict->add_option("--store", pr_store)->required();
  predict->add_option("--scene", pr_scene)->required();
  predict->add_option("--frames", pr_frames);
  predict->add_option("--k", pr_k);
  predict->add_option("--features", pr_features);
  predict->add_option("--out", pr_out)->required();

  // rollout
  auto* roll = app.add_subcommand("rollout", "closed-loop simulation of one vehicle");
  std::string ro_scene, ro_controller = "idm", ro_params, ro_out;
  long long ro_vehicle = 0;
  int ro_horizon = 100;
  roll->add_option("--scene", ro_scene)->required();
  roll->add_option("--vehicle", ro_vehicle)->required();
  roll->add_option("--controller", ro_controller, "idm|constvel");
  roll->add_option("--params", ro_params, "inline JSON or a json file path");
  roll->add_option("--horizon", ro_horizon);
  roll->add_option("--out", ro_out)->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "benchmark methods over a test scene");
  std::string ev_store, ev_test, ev_methods = "constvel,avg,pred,oracle";
  std::string ev_features = "tau,nu,omega", ev_ablation = "none", ev_frames_list = "2,4,6,10,20";
  std::string ev_out, ev_records;
  int ev_horizon = 100, ev_frames = 10, ev_k = 8;
  evaluate->add_option("--store", ev_store)->required();
  evaluate->add_option("--test", ev_test)->required();
  evaluate->add_option("--methods", ev_methods);
  evaluate->add_option("--horizon", ev_horizon);
  evaluate->add_option("--frames", ev_frames);
  evaluate->add_option("--k", ev_k);
  evaluate->add_option("--features", ev_features);
  evaluate->add_option("--ablation", ev_ablation, "none|codes|frames");
  evaluate->add_option("--frames-list", ev_frames_list);
  evaluate->add_option("--out", ev_out)->required();
  evaluate->add_option("--records", ev_records, "per-vehicle records CSV");

  // report
  auto* report = app.add_subcommand("report", "render a records CSV as a table");
  std::string rp_records, rp_format = "md", rp_out;
  report->add_option("--records", rp_records)->required();
  report->add_option("--format", rp_format, "md|csv");
  report->add_option("--out", rp_out, "defaults to stdout");

  // risk
  auto* risk = app.add_subcommand("risk", "Gaussian overlap risk between two footprints");
  std::string rk_ego, rk_other;
  risk->add_option("--ego", rk_ego)->required();
  risk->add_option("--other", rk_other)->required();

  // Let --seed/--jobs/--config appear after the subcommand name too.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(ingest)) {
      return cmd_ingest(in_input, in_units, in_lanes, in_axes, in_lanes_file, in_hygiene,
                        in_filter_report, in_v0, in_dt, in_out, common);
    }
    if (app.got_subcommand(estimate)) {
      return cmd_estimate(es_scene, es_bounds, es_restarts, es_horizon, es_out, common);
    }
    if (app.got_subcommand(predict)) {
      return cmd_predict(pr_store, pr_scene, pr_frames, pr_k, pr_features, pr_out, common);
    }
    if (app.got_subcommand(roll)) {
      return cmd_rollout(ro_scene, ro_vehicle, ro_controller, ro_params, ro_horizon, ro_out,
                         common);
    }
    if (app.got_subcommand(evaluate)) {
      return cmd_evaluate(ev_store, ev_test, ev_methods, ev_horizon, ev_frames, ev_k, ev_features,
                          ev_ablation, ev_frames_list, ev_out, ev_records, common);
    }
    if (app.got_subcommand(report)) return cmd_report(rp_records, rp_format, rp_out);
    if (app.got_subcommand(risk)) return cmd_risk(rk_ego, rk_other);
  } catch (const idmkit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
