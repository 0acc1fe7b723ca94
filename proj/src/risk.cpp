#include "idmkit/risk.hpp"

#include <cmath>
#include <limits>

#include "idmkit/errors.hpp"

namespace idmkit {

namespace {

// Lower-triangular Cholesky factor of a symmetric positive-definite 2x2.
struct Chol2 {
  double l00, l10, l11;
};

Chol2 cholesky(const Mat2& m) {
  if (!(m.m00 > 0.0)) throw Error("matrix not positive definite");
  const double l00 = std::sqrt(m.m00);
  const double l10 = m.m10 / l00;
  const double d = m.m11 - l10 * l10;
  if (!(d > 0.0)) throw Error("matrix not positive definite");
  return {l00, l10, std::sqrt(d)};
}

double chol_det(const Chol2& c) {
  const double d = c.l00 * c.l11;
  return d * d;
}

// Solves M x = b through the factor (forward then back substitution).
Vec2 chol_solve(const Chol2& c, Vec2 b) {
  const double y0 = b.x / c.l00;
  const double y1 = (b.y - c.l10 * y0) / c.l11;
  const double x1 = y1 / c.l11;
  const double x0 = (y0 - c.l10 * x1) / c.l00;
  return {x0, x1};
}

Mat2 chol_inverse(const Chol2& c) {
  const Vec2 c0 = chol_solve(c, {1.0, 0.0});
  const Vec2 c1 = chol_solve(c, {0.0, 1.0});
  return {c0.x, c1.x, c0.y, c1.y};
}

Vec2 mat_vec(const Mat2& m, Vec2 v) {
  return {m.m00 * v.x + m.m01 * v.y, m.m10 * v.x + m.m11 * v.y};
}

}  // namespace

Mat2 ellipse_covariance(double heading, double L, double W) {
  if (!(L > 0.0) || !(W > 0.0)) throw Error("ellipse scales must be positive");
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  // R * diag(L, W) * R^T
  return {c * c * L + s * s * W, c * s * (L - W), c * s * (L - W), s * s * L + c * c * W};
}

double gaussian_overlap_risk(const EllipseGaussian& ego, const EllipseGaussian& other) {
  const Mat2 sigma = ellipse_covariance(ego.tau_rot, ego.L, ego.W);
  const Mat2 gamma = ellipse_covariance(other.tau_rot, other.L, other.W);
  const Chol2 cs = cholesky(sigma);
  const Chol2 cg = cholesky(gamma);

  const Mat2 sigma_inv = chol_inverse(cs);
  const Mat2 gamma_inv = chol_inverse(cg);
  const Mat2 a{sigma_inv.m00 + gamma_inv.m00, sigma_inv.m01 + gamma_inv.m01,
               sigma_inv.m10 + gamma_inv.m10, sigma_inv.m11 + gamma_inv.m11};
  const Chol2 ca = cholesky(a);  // a = omega^{-1}

  const Vec2 si_mu = mat_vec(sigma_inv, ego.mu);
  const Vec2 gi_th = mat_vec(gamma_inv, other.mu);
  const Vec2 rhs = si_mu + gi_th;
  const Vec2 w = chol_solve(ca, rhs);  // omega * rhs

  // v^T omega^{-1} v collapses to rhs . w; |omega| = 1 / |a|.
  const double quad = dot(rhs, w) - dot(ego.mu, si_mu) - dot(other.mu, gi_th);
  const double norm = 2.0 * M_PI * std::sqrt(chol_det(ca) * chol_det(cs) * chol_det(cg));
  return std::exp(0.5 * quad) / norm;
}

EllipseGaussian vehicle_ellipse(const VehicleState& state, const VehicleGeometry& geom,
                                double scale_l, double scale_w) {
  EllipseGaussian e;
  e.mu = state.position();
  e.tau_rot = state.psi;
  const double hl = 0.5 * geom.length * scale_l;
  const double hw = 0.5 * geom.width * scale_w;
  e.L = hl * hl;
  e.W = hw * hw;
  return e;
}

RewardFeatures reward_features(const VehicleState& state, const VehicleGeometry& geom,
                               const LaneGeometry& lane,
                               std::span<const std::vector<Vec2>> road_boundaries,
                               std::span<const ReplayOther> others) {
  RewardFeatures f;
  const LaneProjection proj = project_to_lane(lane, state.position());
  f.lane_center_dist = std::abs(proj.offset);
  f.heading_error = normalize_angle(state.psi - proj.tangent);
  f.speed = state.v;

  double boundary = std::numeric_limits<double>::infinity();
  for (const auto& polyline : road_boundaries) {
    boundary = std::min(boundary, point_polyline_distance(polyline, state.position()));
  }
  f.road_boundary_dist = std::isfinite(boundary) ? boundary : 0.0;

  const EllipseGaussian ego = vehicle_ellipse(state, geom);
  for (const auto& other : others) {
    f.collision_risk += gaussian_overlap_risk(ego, vehicle_ellipse(other.state, other.geom));
  }
  return f;
}

}  // namespace idmkit
