#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idmkit/idm.hpp"
#include "idmkit/knn.hpp"
#include "idmkit/rollout.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

struct OptConfig {
  int restarts = 5;            // low-discrepancy starting points
  int max_iters = 60;          // quasi-Newton iterations per start
  double fd_step_frac = 1e-3;  // central-difference step, fraction of bound width
  double gtol = 1e-7;          // projected-gradient infinity-norm stop
  double ftol = 1e-12;         // relative objective-change stop
  // Extra start at the training-population mean; bounds center when absent.
  std::optional<IdmParams> mean_start;
  IdmGlobals globals;
  RolloutConfig rollout;
};

struct FitResult {
  IdmParams params;
  double ade = 0.0;
  double fde = 0.0;
  int n_restarts_used = 0;
  bool converged = false;
};

// Fits IdmParams to one episode by minimizing closed-loop rollout ADE with a
// bounded quasi-Newton method (projected BFGS, central finite differences)
// from several deterministic starts. Never throws on optimization trouble:
// the best point found so far is always returned.
FitResult fit_idm(const Episode& episode, const IdmBounds& bounds, const OptConfig& cfg);

struct TrainingFitReport {
  std::vector<std::pair<VehicleId, std::string>> skipped;
};

// Fits every vehicle with at least `horizon` frames and pairs the parameters
// with the vehicle's whole-trajectory driving code. Per-vehicle failures are
// recorded and skipped; fits may run on `parallelism` threads with a
// deterministic id-ordered reduction.
KnnStore fit_training_set(const Scene& scene, const IdmBounds& bounds, const OptConfig& cfg,
                          int horizon, const CodeConfig& code_cfg = {},
                          TrainingFitReport* report = nullptr, int parallelism = 1);

namespace detail {

// Box-constrained minimizer used by fit_idm, exposed for direct testing.
struct BoxMinResult {
  std::array<double, 5> x{};
  double f = 0.0;
  bool converged = false;
};

BoxMinResult minimize_box(const std::function<double(const std::array<double, 5>&)>& f,
                          const std::array<double, 5>& lo, const std::array<double, 5>& hi,
                          const std::array<double, 5>& x0, const OptConfig& cfg);

// Halton low-discrepancy point r (r >= 1) scaled into the box.
std::array<double, 5> halton_start(int r, const std::array<double, 5>& lo,
                                   const std::array<double, 5>& hi);

}  // namespace detail

}  // namespace idmkit
