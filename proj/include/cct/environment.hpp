#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cct/math_types.hpp"
#include "cct/robot_state.hpp"

namespace cct {

struct Spring {
  Vec3 anchor = Vec3::Zero();
  double rest_length = 0.0;
  double stiffness = 0.0;  // N/m
};

/// Linearly ramping viscous medium. Viscosity is a function of the step
/// index so ramp rate is tied to the control rate, not wall time.
struct PorridgeSpec {
  double viscosity_start = 0.0;  // N·s/m^2
  double viscosity_rate = 0.0;   // N·s/m^2 per step
  double viscosity_max = -1.0;   // <0 means unbounded

  double viscosity_at(long step) const {
    double v = viscosity_start + viscosity_rate * static_cast<double>(step);
    if (viscosity_max >= 0.0 && v > viscosity_max) v = viscosity_max;
    return v < 0.0 ? 0.0 : v;
  }
};

/// Axis-aligned friction patch lying on a contact surface. `blend_width`
/// widens the boundary so the coefficient ramps instead of stepping;
/// zero keeps the transition instantaneous.
struct FrictionPatch {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  double mu = 0.0;
  double blend_width = 0.0;  // m

  bool contains(const Vec3& p) const {
    for (int i = 0; i < 3; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  // Distance inward from the patch boundary along free axes; used by the
  // boundary blend. Negative outside.
  double inset(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (hi[i] - lo[i] <= 0.0) continue;
      d = std::min(d, std::min(p[i] - lo[i], hi[i] - p[i]));
    }
    return std::isfinite(d) ? d : 0.0;
  }
};

/// Penalty-contact half-space: penetration on the anti-normal side produces
/// a spring-damper reaction along the unit normal.
struct Wall {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double stiffness = 0.0;  // N/m
  double damping = 0.0;    // N·s/m

  double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

struct EnvironmentSpec {
  // Sections are composable: a scenario combines whichever force elements
  // it needs (e.g. walls plus friction patches for sliding tasks).
  std::string variant = "custom";
  std::vector<Spring> springs;
  std::optional<PorridgeSpec> porridge;
  std::vector<FrictionPatch> friction_patches;
  std::vector<Wall> walls;
  Vec3 gravity = Vec3::Zero();     // m/s^2
  double effector_mass = 1.0;      // kg
  double effector_inertia = 0.01;  // kg·m^2 about the planar axis
  double friction_deadband = 1e-4; // m/s, below which kinetic friction is off

  void validate() const;

  /// Kinetic friction coefficient at a position, blended across patch
  /// boundaries when a blend width is configured.
  double friction_mu_at(const Vec3& p) const;

  /// Index of the patch containing the position, -1 when outside all.
  int friction_patch_index_at(const Vec3& p) const;
};

struct WallContact {
  int wall_index = -1;
  double penetration = 0.0;
  double normal_force = 0.0;  // reaction magnitude along the wall normal
};

/// Full environment reaction on the effector plus per-wall contact detail.
struct EnvironmentReaction {
  Wrench wrench;
  std::vector<WallContact> wall_contacts;
};

/// Reaction wrench the environment applies to the effector, with wall
/// normal forces derived from the penalty model and friction driven by
/// those normal forces.
EnvironmentReaction environment_reaction(const EnvironmentSpec& spec, const RobotState& state,
                                         long step_index);

/// Reaction wrench with an externally supplied normal force for the
/// friction term (the applied-load form used by the friction model).
Wrench environment_force(const EnvironmentSpec& spec, const RobotState& state,
                         double normal_force, long step_index = 0);

}  // namespace cct
