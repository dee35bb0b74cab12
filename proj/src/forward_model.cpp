#include "cct/forward_model.hpp"

#include <cmath>

namespace cct {

namespace {

Vec3 motion_axis_force(const RobotState& state, const std::array<bool, 3>& force_axes) {
  Vec3 f = state.measured_wrench.force;
  for (int i = 0; i < 3; ++i)
    if (force_axes[i]) f[i] = 0.0;
  return f;
}

}  // namespace

FeatureState feature_of(const RobotState& state, const std::array<bool, 3>& force_axes) {
  FeatureState s;
  s.lin_speed = state.linear_velocity.norm();
  s.ang_speed = std::abs(state.angular_velocity);
  s.force_mag = motion_axis_force(state, force_axes).norm();
  s.torque_mag = std::abs(state.measured_wrench.torque);
  return s;
}

InteractionEffect effect_of(const RobotState& state, const std::array<bool, 3>& force_axes) {
  InteractionEffect d;
  d.force_mag = motion_axis_force(state, force_axes).norm();
  d.torque_mag = std::abs(state.measured_wrench.torque);
  return d;
}

Vec6 joint_point(const FeatureState& prev_state, const InteractionEffect& effect) {
  Vec6 p;
  p << prev_state.vec(), effect.vec();
  return p;
}

double prediction_error(const VecD& predicted, const InteractionEffect& measured,
                        double torque_scale) {
  const double df = predicted[0] - measured.force_mag;
  const double dt = torque_scale * (predicted[1] - measured.torque_mag);
  return std::sqrt(df * df + dt * dt);
}

Wrench direction_recovery(const InteractionEffect& effect, const Vec3& linear_velocity,
                          double angular_velocity, double speed_deadband) {
  Wrench w;
  const double speed = linear_velocity.norm();
  if (speed >= speed_deadband && speed > 0.0)
    w.force = -effect.force_mag * (linear_velocity / speed);
  if (std::abs(angular_velocity) >= speed_deadband)
    w.torque = -effect.torque_mag * (angular_velocity > 0.0 ? 1.0 : -1.0);
  return w;
}

}  // namespace cct
