#pragma once

#include <array>
#include <span>
#include <vector>

#include "idmkit/geometry.hpp"
#include "idmkit/scene.hpp"

namespace idmkit {

// 2x2 matrix, row major.
struct Mat2 {
  double m00 = 1.0, m01 = 0.0;
  double m10 = 0.0, m11 = 1.0;
};

// Oriented Gaussian footprint of one vehicle. The covariance is
// R(tau_rot) * diag(L, W) * R(tau_rot)^T.
struct EllipseGaussian {
  Vec2 mu;            // position mean, m
  double tau_rot = 0; // heading, rad
  double L = 1.0;     // longitudinal eigenvalue, m^2
  double W = 1.0;     // lateral eigenvalue, m^2
};

// Throws Error on non-positive scales.
Mat2 ellipse_covariance(double heading, double L, double W);

// Integral of the product of the two Gaussian densities, in closed form.
// Evaluated through symmetric (Cholesky) solves. Throws Error when either
// covariance is not positive definite.
double gaussian_overlap_risk(const EllipseGaussian& ego, const EllipseGaussian& other);

// One standard deviation spans the half-extent of the body by default;
// the multipliers rescale the footprint.
EllipseGaussian vehicle_ellipse(const VehicleState& state, const VehicleGeometry& geom,
                                double scale_l = 1.0, double scale_w = 1.0);

struct RewardFeatures {
  double lane_center_dist = 0.0;   // m
  double road_boundary_dist = 0.0; // m
  double speed = 0.0;              // m/s
  double heading_error = 0.0;      // rad, relative to the road direction
  double collision_risk = 0.0;     // summed pairwise Gaussian overlap

  std::array<double, 5> as_array() const {
    return {lane_center_dist, road_boundary_dist, speed, heading_error, collision_risk};
  }
};

RewardFeatures reward_features(const VehicleState& state, const VehicleGeometry& geom,
                               const LaneGeometry& lane,
                               std::span<const std::vector<Vec2>> road_boundaries,
                               std::span<const ReplayOther> others);

}  // namespace idmkit
