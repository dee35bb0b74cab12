#pragma once

#include "cct/math_types.hpp"

namespace cct {

/// End-effector state at one control tick. Orientation is the planar angle
/// about the z axis; 2D scenarios simply keep position.z() at zero.
struct RobotState {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  double orientation = 0.0;
  Vec3 linear_velocity = Vec3::Zero();
  double angular_velocity = 0.0;
  Wrench measured_wrench;

  bool finite() const {
    return std::isfinite(time) && is_finite(position) && std::isfinite(orientation) &&
           is_finite(linear_velocity) && std::isfinite(angular_velocity) &&
           is_finite(measured_wrench);
  }
};

}  // namespace cct
