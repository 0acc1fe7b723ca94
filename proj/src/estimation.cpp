#include "idmkit/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "idmkit/errors.hpp"
#include "idmkit/metrics.hpp"
#include "idmkit/parallel.hpp"

namespace idmkit {

namespace detail {

namespace {

using Vec5 = std::array<double, 5>;

Vec5 clip(const Vec5& x, const Vec5& lo, const Vec5& hi) {
  Vec5 out;
  for (std::size_t i = 0; i < 5; ++i) out[i] = std::clamp(x[i], lo[i], hi[i]);
  return out;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

// Central differences with evaluation points clipped into the box; the
// divisor uses the actually realized displacement.
Vec5 fd_gradient(const std::function<double(const Vec5&)>& f, const Vec5& x, const Vec5& lo,
                 const Vec5& hi, double step_frac) {
  Vec5 g{};
  for (std::size_t i = 0; i < 5; ++i) {
    const double h = step_frac * (hi[i] - lo[i]);
    Vec5 xp = x, xm = x;
    xp[i] = std::min(x[i] + h, hi[i]);
    xm[i] = std::max(x[i] - h, lo[i]);
    const double denom = xp[i] - xm[i];
    g[i] = denom > 0.0 ? (f(xp) - f(xm)) / denom : 0.0;
  }
  return g;
}

}  // namespace

std::array<double, 5> halton_start(int r, const Vec5& lo, const Vec5& hi) {
  static constexpr std::array<int, 5> primes = {2, 3, 5, 7, 11};
  Vec5 x;
  for (std::size_t i = 0; i < 5; ++i) {
    x[i] = lo[i] + halton(r, primes[i]) * (hi[i] - lo[i]);
  }
  return x;
}

BoxMinResult minimize_box(const std::function<double(const Vec5&)>& f, const Vec5& lo,
                          const Vec5& hi, const Vec5& x0, const OptConfig& cfg) {
  Vec5 x = clip(x0, lo, hi);
  double fx = f(x);

  // Inverse Hessian approximation, reset to identity on non-descent.
  double H[5][5];
  const auto reset_H = [&] {
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) H[i][j] = i == j ? 1.0 : 0.0;
    }
  };
  reset_H();

  Vec5 g = fd_gradient(f, x, lo, hi, cfg.fd_step_frac);
  BoxMinResult best{x, fx, false};

  const double f_scale = std::max(1.0, std::abs(fx));
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Gradient projected onto the active bounds; those dimensions stay
    // frozen for the whole iteration.
    Vec5 pg = g;
    std::array<bool, 5> frozen{};
    for (std::size_t i = 0; i < 5; ++i) {
      if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) {
        pg[i] = 0.0;
        frozen[i] = true;
      }
    }
    double pg_inf = 0.0;
    for (double v : pg) pg_inf = std::max(pg_inf, std::abs(v));
    if (pg_inf < cfg.gtol * f_scale) {
      best.converged = true;
      break;
    }

    const auto quasi_newton_dir = [&] {
      Vec5 dir;
      for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 5; ++j) s += H[i][j] * pg[j];
        dir[i] = frozen[i] ? 0.0 : -s;
      }
      return dir;
    };
    const auto steepest_dir = [&] {
      Vec5 dir;
      for (std::size_t i = 0; i < 5; ++i) dir[i] = -pg[i];
      return dir;
    };
    const auto descent_of = [&](const Vec5& dir) {
      double s = 0.0;
      for (std::size_t i = 0; i < 5; ++i) s += dir[i] * g[i];
      return s;
    };

    // Backtracking Armijo search on the projected point.
    constexpr double c1 = 1e-4;
    const auto line_search = [&](const Vec5& dir, Vec5& x_out, double& f_out) {
      double alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        Vec5 trial;
        for (std::size_t i = 0; i < 5; ++i) trial[i] = x[i] + alpha * dir[i];
        trial = clip(trial, lo, hi);
        if (trial == x) return false;  // projection ate the whole step
        const double ft = f(trial);
        double gd = 0.0;
        for (std::size_t i = 0; i < 5; ++i) gd += g[i] * (trial[i] - x[i]);
        if (ft <= fx + c1 * gd && ft < fx) {
          x_out = trial;
          f_out = ft;
          return true;
        }
      }
      return false;
    };

    Vec5 dir = quasi_newton_dir();
    bool have_dir = descent_of(dir) < 0.0;
    Vec5 x_new{};
    double f_new = fx;
    bool accepted = have_dir && line_search(dir, x_new, f_new);
    if (!accepted) {
      // Fall back to projected steepest descent with a fresh Hessian.
      reset_H();
      dir = steepest_dir();
      if (descent_of(dir) < 0.0) accepted = line_search(dir, x_new, f_new);
    }
    if (!accepted) break;  // no decrease found; report best seen so far

    const Vec5 g_new = fd_gradient(f, x_new, lo, hi, cfg.fd_step_frac);

    // BFGS update of the inverse Hessian when curvature is usable.
    Vec5 s{}, y{};
    double sy = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-12) {
      double Hy[5];
      for (int i = 0; i < 5; ++i) {
        Hy[i] = 0.0;
        for (int j = 0; j < 5; ++j) Hy[i] += H[i][j] * y[j];
      }
      double yHy = 0.0;
      for (int i = 0; i < 5; ++i) yHy += y[i] * Hy[i];
      const double rho = 1.0 / sy;
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          H[i][j] += rho * rho * (sy + yHy) * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
      }
    }

    const double rel_drop = (fx - f_new) / std::max(1.0, std::abs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    if (fx < best.f) {
      best.x = x;
      best.f = fx;
    }
    if (rel_drop < cfg.ftol) {
      best.converged = true;
      break;
    }
  }
  if (fx < best.f) {
    best.x = x;
    best.f = fx;
  }
  return best;
}

}  // namespace detail

FitResult fit_idm(const Episode& episode, const IdmBounds& bounds, const OptConfig& cfg) {
  const auto iv = bounds.as_array();
  std::array<double, 5> lo{}, hi{};
  for (std::size_t i = 0; i < 5; ++i) {
    lo[i] = iv[i].lo;
    hi[i] = iv[i].hi;
  }

  IdmGlobals globals = cfg.globals;
  globals.v0 = episode.v0;
  const double dt = episode.dt();

  const auto objective = [&](const std::array<double, 5>& x) {
    IdmController controller(IdmParams::from_array(x), globals, dt);
    const RolloutResult r = rollout(episode, controller, cfg.rollout);
    if (r.model_trajectory.size() != episode.truth.size()) {
      // Terminated early (lane exhausted): substitute the worst point-wise
      // distance over the produced prefix so the optimizer avoids it.
      double worst = 0.0;
      for (int i = 0; i < r.model_trajectory.size(); ++i) {
        const auto& a = episode.truth.states[static_cast<std::size_t>(i)];
        const auto& b = r.model_trajectory.states[static_cast<std::size_t>(i)];
        worst = std::max(worst, std::hypot(a.x - b.x, a.y - b.y));
      }
      return 1e6 + worst;
    }
    return ade(episode.truth, r.model_trajectory);
  };

  std::vector<std::array<double, 5>> starts;
  IdmParams mean_start;
  if (cfg.mean_start.has_value()) {
    mean_start = bounds.clamp(*cfg.mean_start);
  } else {
    std::array<double, 5> center{};
    for (std::size_t i = 0; i < 5; ++i) center[i] = 0.5 * (lo[i] + hi[i]);
    mean_start = IdmParams::from_array(center);
  }
  starts.push_back(mean_start.as_array());
  for (int r = 1; r <= cfg.restarts; ++r) starts.push_back(detail::halton_start(r, lo, hi));

  FitResult result;
  result.ade = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& s : starts) {
    const detail::BoxMinResult m = detail::minimize_box(objective, lo, hi, s, cfg);
    any_converged = any_converged || m.converged;
    if (m.f < result.ade) {
      result.ade = m.f;
      result.params = IdmParams::from_array(m.x);
    }
    ++result.n_restarts_used;
  }
  result.converged = any_converged;

  IdmController controller(result.params, globals, dt);
  const RolloutResult r = rollout(episode, controller, cfg.rollout);
  if (r.model_trajectory.size() == episode.truth.size()) {
    result.ade = ade(episode.truth, r.model_trajectory);
    result.fde = fde(episode.truth, r.model_trajectory);
  }
  return result;
}

KnnStore fit_training_set(const Scene& scene, const IdmBounds& bounds, const OptConfig& cfg,
                          int horizon, const CodeConfig& code_cfg, TrainingFitReport* report,
                          int parallelism) {
  const SceneIndex index(scene);
  std::vector<VehicleId> ids;
  ids.reserve(scene.vehicles.size());
  for (const auto& [id, track] : scene.vehicles) ids.push_back(id);

  struct Slot {
    bool ok = false;
    std::string reason;
    KnnEntry entry;
  };
  std::vector<Slot> slots(ids.size());

  parallel_for(static_cast<int>(ids.size()), parallelism, [&](int i) {
    const VehicleId id = ids[static_cast<std::size_t>(i)];
    Slot& slot = slots[static_cast<std::size_t>(i)];
    try {
      const Episode ep = episode_window(scene, index, id, horizon);
      const FitResult fit = fit_idm(ep, bounds, cfg);
      // Driving code over the whole trajectory, full feature set.
      const DrivingCode code = extract_code(scene, index, id, 0, FeatureMask{}, code_cfg);
      slot.entry = KnnEntry{id, code, fit.params};
      slot.ok = true;
    } catch (const Error& err) {
      slot.reason = err.what();
    }
  });

  std::vector<KnnEntry> entries;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok) {
      entries.push_back(slots[i].entry);
    } else if (report != nullptr) {
      report->skipped.emplace_back(ids[i], slots[i].reason);
    }
  }
  return KnnStore::build(std::move(entries));
}

}  // namespace idmkit
