#pragma once

#include <array>

#include "cct/math_types.hpp"
#include "cct/mixture.hpp"
#include "cct/robot_state.hpp"

namespace cct {

/// Direction-free state channels: speeds and wrench magnitudes.
struct FeatureState {
  double lin_speed = 0.0;
  double ang_speed = 0.0;
  double force_mag = 0.0;
  double torque_mag = 0.0;

  VecS vec() const { return VecS(lin_speed, ang_speed, force_mag, torque_mag); }
};

/// Interaction effect magnitudes the feed-forward has to counter.
struct InteractionEffect {
  double force_mag = 0.0;
  double torque_mag = 0.0;

  VecD vec() const { return VecD(force_mag, torque_mag); }
};

/// State features from a measurement. Wrench components on force-controlled
/// axes are regulated by the force loop and excluded from the magnitudes the
/// model learns, so the feed-forward never duplicates the commanded load.
FeatureState feature_of(const RobotState& state, const std::array<bool, 3>& force_axes);

InteractionEffect effect_of(const RobotState& state, const std::array<bool, 3>& force_axes);

/// Joint training point [previous state channels, current effect channels].
Vec6 joint_point(const FeatureState& prev_state, const InteractionEffect& effect);

/// Scalar prediction error over the effect channels; the torque channel is
/// scaled to balance units against the force channel.
double prediction_error(const VecD& predicted, const InteractionEffect& measured,
                        double torque_scale);

/// Reconstruct the reaction wrench a predicted effect magnitude implies:
/// resistive, aligned against the motion direction. Below the speed
/// dead-band the reconstruction is zero to avoid chatter at rest.
Wrench direction_recovery(const InteractionEffect& effect, const Vec3& linear_velocity,
                          double angular_velocity, double speed_deadband);

}  // namespace cct
