#pragma once

#include <optional>
#include <vector>

#include "cct/anticipation.hpp"
#include "cct/controller.hpp"
#include "cct/math_types.hpp"
#include "cct/plan.hpp"

namespace cct {

struct TransitionConfig {
  /// Duration of the velocity shaping window (t2 - t1).
  double profile_duration = 1.0;  // s
  /// Impact transitions relax stiffness to this multiple of kp_free.
  double kp_low_scale = 0.5;
  /// Floor for the controller-interpolation window.
  double min_blend_time = 0.05;  // s
};

struct TransitionGains {
  AxisVec kp = AxisVec::Zero();
  AxisVec kd = AxisVec::Zero();
  /// Approach-speed target inside the region; nullopt keeps the plan speed.
  std::optional<double> approach_velocity;
};

/// Gain/velocity policy of the transition-phase controller. Impacts get low
/// stiffness and the learned approach velocity; impact-less transitions get
/// maximum stiffness at unchanged speed.
TransitionGains transition_gains(ContactKind kind, const GainConfig& gains,
                                 const TransitionConfig& cfg, const ImpactModel* impact);

/// Linear controller interpolation over a window of length T:
/// u = (1 - a) u1 + a u2 with a = clamp(t/T, 0, 1).
Wrench blend(const Wrench& u1, const Wrench& u2, double t, double T);

/// Convenience holder for an interpolation window.
struct BlendSchedule {
  double start_time = 0.0;
  double window = 1.0;  // T
  double alpha(double t) const {
    return window > 0.0 ? clamp01((t - start_time) / window) : 1.0;
  }
};

struct VelocityProfileParams {
  double v1 = 0.0;
  double v2 = 0.0;
  double t1 = 0.0;
  double t2 = 1.0;
};

/// Speed at normalised phase tau: v1 below 0, v2 above 1, and a smooth bump
/// mixture in between with every derivative vanishing at the boundaries.
double velocity_profile_tau(double v1, double v2, double tau);

double velocity_profile(const VelocityProfileParams& params, double t);

/// One anticipated-transition window on the retimed timeline.
struct TransitionWindow {
  int region_index = -1;
  ContactKind kind = ContactKind::Impact;
  double blend_in_start = 0.0;
  double entry_time = 0.0;   // robot crosses the region boundary point
  double exit_time = 0.0;
  double blend_out_end = 0.0;
  double target_speed = 0.0;
  double entry_arc = 0.0;
  double exit_arc = 0.0;
  bool compressed = false;  // deceleration window clipped for room
};

struct RetimeResult {
  MotionPlan plan;
  std::vector<TransitionWindow> windows;
};

/// Re-time the plan so each region is entered at its target speed, with the
/// approach shaped by the smooth profile completing exactly at the region
/// boundary, and speed restored symmetrically after the exit. The path is
/// unchanged; positions are the trapezoid-integrated profile at control
/// rate. Regions must be sorted by entry arc.
RetimeResult retime_plan(const MotionPlan& plan,
                         const std::vector<TransitionRegion>& regions,
                         const std::vector<double>& target_speeds,
                         const TransitionConfig& cfg, double dt);

/// Single-region form.
RetimeResult retime_plan(const MotionPlan& plan, const TransitionRegion& region,
                         double target_speed, const TransitionConfig& cfg, double dt);

}  // namespace cct
