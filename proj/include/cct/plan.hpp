#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cct/math_types.hpp"

namespace cct {

/// Orthogonal force target for a plan segment: the listed axes are
/// force-controlled (measured-wrench setpoint), the rest stay under motion
/// control.
struct ForceTarget {
  std::array<bool, 3> axes = {false, false, false};
  Vec3 value = Vec3::Zero();
};

struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  double orientation = 0.0;
  /// Applies over the segment starting at this waypoint.
  std::optional<ForceTarget> force;
};

struct PlanSample {
  Vec3 position = Vec3::Zero();
  double orientation = 0.0;
  Vec3 velocity = Vec3::Zero();
  double angular_velocity = 0.0;
  std::array<bool, 3> force_axes = {false, false, false};
  Vec3 force_target = Vec3::Zero();
  double speed = 0.0;  // along-path target speed
  int segment = 0;
};

/// Time-indexed task-space pattern: a polyline of timed waypoints with
/// per-segment speeds implied by the timestamps.
class MotionPlan {
 public:
  MotionPlan() = default;
  explicit MotionPlan(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  bool empty() const { return waypoints_.empty(); }
  double duration() const { return waypoints_.empty() ? 0.0 : waypoints_.back().time; }
  double total_arc() const { return cumulative_arc_.empty() ? 0.0 : cumulative_arc_.back(); }

  /// Linear interpolation; clamps to the endpoints outside the time range.
  PlanSample sample(double t) const;

  Vec3 position_at_arc(double s) const;
  double orientation_at_arc(double s) const;
  double arc_at_time(double t) const;
  double time_at_arc(double s) const;
  /// Arc length of the closest point of the polyline to p.
  double arc_of_closest_point(const Vec3& p) const;
  /// Segment index containing arc length s.
  int segment_at_arc(double s) const;
  double segment_speed(int segment) const;
  /// Force target active on the segment containing arc length s.
  std::optional<ForceTarget> force_at_arc(double s) const;

  std::string to_json_string() const;
  static MotionPlan from_json_string(const std::string& text);
  static MotionPlan load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<Waypoint> waypoints_;
  std::vector<double> cumulative_arc_;
  int segment_at_time(double t) const;
};

}  // namespace cct
