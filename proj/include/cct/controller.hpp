#pragma once

#include <stdexcept>

#include "cct/math_types.hpp"
#include "cct/plan.hpp"
#include "cct/robot_state.hpp"

namespace cct {

class ControllerFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GainConfig {
  AxisVec kp_free = AxisVec(50.0, 50.0, 50.0, 5.0);
  AxisVec kp_max = AxisVec(1000.0, 1000.0, 1000.0, 100.0);
  double logistic_rate = 20.0;      // r
  double logistic_midpoint = 0.5;   // epsilon_0, in prediction-error units
  double force_kp = 1.0;
  double force_ki = 25.0;           // 1/s
  double force_integral_limit = 20.0;  // N
  /// Damping rule: sqrt(kp/4) as used by the stiffness adaptation law;
  /// the conventional critically-damped 2*sqrt(kp) is available for
  /// sensitivity studies.
  bool conventional_damping = false;
  /// Max per-axis stiffness change per tick; <=0 disables the limit.
  double gain_slew = 0.0;
  double ff_speed_deadband = 1e-3;  // m/s
  double torque_error_scale = 1.0;
  /// Exponential smoothing weight on the previous prediction error.
  double eps_smoothing = 0.1;

  void validate() const {
    if (!(logistic_rate > 0.0)) throw std::invalid_argument("logistic_rate must be > 0");
    if (!(logistic_midpoint > 0.0)) throw std::invalid_argument("logistic_midpoint must be > 0");
    for (int i = 0; i < 4; ++i) {
      if (!(kp_free[i] > 0.0)) throw std::invalid_argument("kp_free must be > 0");
      if (kp_free[i] > kp_max[i])
        throw std::invalid_argument("kp_free must be <= kp_max element-wise");
    }
    if (eps_smoothing < 0.0 || eps_smoothing >= 1.0)
      throw std::invalid_argument("eps_smoothing must be in [0, 1)");
  }
};

/// lambda = 1 - 1/(1 + exp(-r (eps - eps0))); strictly decreasing in eps,
/// 0.5 at the midpoint, saturating to 1 at zero error and 0 at large error.
double lambda_of_error(double eps, const GainConfig& cfg);

/// kp = kp_free + (1 - lambda) (kp_max - kp_free), element-wise.
AxisVec stiffness_of(double lambda, const GainConfig& cfg);

AxisVec damping_of(const AxisVec& kp, const GainConfig& cfg);

/// Mutable per-trial controller state: the previous tick's activation, the
/// slew-limited gains and the force-integral accumulator.
struct ControllerState {
  double lambda = 0.0;
  double eps = std::numeric_limits<double>::infinity();
  AxisVec kp;
  AxisVec kd;
  Vec3 force_integral = Vec3::Zero();

  explicit ControllerState(const GainConfig& cfg)
      : kp(cfg.kp_max), kd(damping_of(cfg.kp_max, cfg)) {}
};

/// Pose/velocity feedback on motion axes; force-targeted axes get zero.
Wrench motion_feedback(const RobotState& state, const PlanSample& target, const AxisVec& kp,
                       const AxisVec& kd);

/// Integral force regulation on the targeted axes (anti-windup clamped).
/// Updates the integral; call once per tick per trial.
Vec3 force_control_term(const RobotState& state, const PlanSample& target, double dt,
                        const GainConfig& cfg, Vec3& force_integral);

/// Hybrid force-impedance law: motion feedback on motion axes, integral
/// force regulation on force-targeted axes, gravity compensation, and the
/// weighted feed-forward wrench. `w_pred` is the compensation wrench (the
/// negated predicted reaction). Throws ControllerFault on non-finite input.
Wrench control(const RobotState& state, const PlanSample& target, const Wrench& w_pred,
               double lambda_prev, const AxisVec& kp, const AxisVec& kd,
               const Vec3& gravity_force, double dt, const GainConfig& cfg,
               Vec3& force_integral);

/// Constant-gain baseline: the same law with lambda = 0 and fixed stiffness.
Wrench fixed_gain_control(const RobotState& state, const PlanSample& target,
                          const AxisVec& kp_const, const Vec3& gravity_force, double dt,
                          const GainConfig& cfg, Vec3& force_integral);

}  // namespace cct
