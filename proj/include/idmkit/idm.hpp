#pragma once

#include <array>
#include <limits>

namespace idmkit {

// The five driver-specific behavioral parameters.
struct IdmParams {
  double a = 1.5;         // maximum acceleration, m/s^2
  double b = 2.0;         // desired deceleration, m/s^2
  double T_headway = 1.5; // safe time headway, s
  double d0 = 2.0;        // jam distance, m
  double d1 = 0.0;        // velocity-dependent jam distance, m

  std::array<double, 5> as_array() const { return {a, b, T_headway, d0, d1}; }
  static IdmParams from_array(const std::array<double, 5>& x) {
    return {x[0], x[1], x[2], x[3], x[4]};
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

struct IdmBounds {
  Interval a{0.3, 5.0};
  Interval b{0.5, 5.0};
  Interval T_headway{0.1, 3.0};
  Interval d0{0.0, 10.0};
  Interval d1{0.0, 20.0};

  std::array<Interval, 5> as_array() const { return {a, b, T_headway, d0, d1}; }
  bool contains(const IdmParams& p) const;
  IdmParams clamp(const IdmParams& p) const;
};

struct IdmGlobals {
  double v0 = 29.06;  // desired speed (road speed limit), m/s
  double phi = 4.0;   // acceleration exponent
};

inline constexpr double kNoLead = std::numeric_limits<double>::infinity();

// Car-following state: own speed, approach rate to the lead, gap to the
// lead's rear bumper. d == kNoLead means free road (dv is then ignored).
struct IdmState {
  double v = 0.0;
  double dv = 0.0;
  double d = kNoLead;

  bool has_lead() const { return d != kNoLead; }
  static IdmState free_road(double v) { return {v, 0.0, kNoLead}; }
};

// Desired minimum gap d*(v, dv), clamped at zero: a strongly negative
// approach rate would otherwise turn the interaction term into thrust.
double desired_gap(const IdmParams& params, const IdmGlobals& globals, double v, double dv);

// IDM acceleration. The result is clamped below so that v + accel*dt >= 0.
// Throws InvalidGapError when a lead is present with d <= 0.
double idm_accel(const IdmParams& params, const IdmGlobals& globals, const IdmState& state,
                 double dt = 0.1);

}  // namespace idmkit
