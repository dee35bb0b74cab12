#include "cct/controller.hpp"

#include <cmath>

namespace cct {

double lambda_of_error(double eps, const GainConfig& cfg) {
  return 1.0 - 1.0 / (1.0 + std::exp(-cfg.logistic_rate * (eps - cfg.logistic_midpoint)));
}

AxisVec stiffness_of(double lambda, const GainConfig& cfg) {
  return cfg.kp_free + (1.0 - lambda) * (cfg.kp_max - cfg.kp_free);
}

AxisVec damping_of(const AxisVec& kp, const GainConfig& cfg) {
  if (cfg.conventional_damping) return 2.0 * kp.cwiseSqrt();
  return (kp / 4.0).cwiseSqrt();
}

Wrench motion_feedback(const RobotState& state, const PlanSample& target, const AxisVec& kp,
                       const AxisVec& kd) {
  const Vec3 pos_err = target.position - state.position;
  const Vec3 vel_err = target.velocity - state.linear_velocity;
  Wrench u;
  for (int i = 0; i < 3; ++i) {
    if (target.force_axes[i]) continue;
    u.force[i] = kp[i] * pos_err[i] + kd[i] * vel_err[i];
  }
  u.torque = kp[3] * (target.orientation - state.orientation) +
             kd[3] * (target.angular_velocity - state.angular_velocity);
  return u;
}

Vec3 force_control_term(const RobotState& state, const PlanSample& target, double dt,
                        const GainConfig& cfg, Vec3& force_integral) {
  Vec3 u = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (!target.force_axes[i]) {
      force_integral[i] = 0.0;
      continue;
    }
    const double ferr = target.force_target[i] - state.measured_wrench.force[i];
    force_integral[i] = std::clamp(force_integral[i] + ferr * dt, -cfg.force_integral_limit,
                                   cfg.force_integral_limit);
    u[i] = cfg.force_kp * ferr + cfg.force_ki * force_integral[i];
  }
  return u;
}

Wrench control(const RobotState& state, const PlanSample& target, const Wrench& w_pred,
               double lambda_prev, const AxisVec& kp, const AxisVec& kd,
               const Vec3& gravity_force, double dt, const GainConfig& cfg,
               Vec3& force_integral) {
  if (!state.finite() || !is_finite(w_pred) || !target.position.allFinite() ||
      !std::isfinite(lambda_prev) || !kp.allFinite() || !kd.allFinite())
    throw ControllerFault("non-finite controller input");

  Wrench u = motion_feedback(state, target, kp, kd);
  u.force += force_control_term(state, target, dt, cfg, force_integral);
  u.force -= gravity_force;  // dynamics compensation for the point effector
  u += lambda_prev * w_pred;
  return u;
}

Wrench fixed_gain_control(const RobotState& state, const PlanSample& target,
                          const AxisVec& kp_const, const Vec3& gravity_force, double dt,
                          const GainConfig& cfg, Vec3& force_integral) {
  return control(state, target, Wrench{}, 0.0, kp_const, damping_of(kp_const, cfg),
                 gravity_force, dt, cfg, force_integral);
}

}  // namespace cct
