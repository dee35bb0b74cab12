#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cct/math_types.hpp"
#include "cct/plan.hpp"
#include "cct/sim.hpp"

namespace cct {

/// Gaussian belief over one contact position along the plan.
struct ContactEstimate {
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
  ContactKind kind = ContactKind::Impact;
  int plan_anchor = 0;  // plan segment this contact guards
};

/// k-sigma ellipsoid of a contact belief intersected with the plan path.
/// The entry point is the boundary point where transition control must be
/// fully engaged.
struct TransitionRegion {
  double entry_arc = 0.0;
  double exit_arc = 0.0;
  Vec3 entry_point = Vec3::Zero();
  Vec3 exit_point = Vec3::Zero();
  ContactKind kind = ContactKind::Impact;
  int estimate_index = -1;

  double length() const { return exit_arc - entry_arc; }
};

/// Per-contact linear relation between approach speed and peak impact
/// force, plus the adapted approach velocity.
struct ImpactModel {
  double approach_velocity = 0.05;  // m/s
  double learning_rate = 0.005;     // m/(s·N)
  std::vector<std::pair<double, double>> samples;  // (speed, measured peak force)

  /// Least-squares (slope, intercept) of force vs speed; nullopt until two
  /// distinct speeds have been observed.
  std::optional<std::pair<double, double>> linear_fit() const;
};

/// Stationary-object prediction step: the mean is self-consistent, process
/// noise widens the belief once per trial.
ContactEstimate kf_predict(const ContactEstimate& estimate, const Mat3& process_noise);
ContactEstimate kf_predict(const ContactEstimate& estimate, double process_noise_var);

/// Identity-observation measurement update (Joseph form). Throws on a
/// non-SPD measurement covariance.
ContactEstimate kf_update(const ContactEstimate& estimate, const Vec3& measured_position,
                          const Mat3& measurement_noise);
ContactEstimate kf_update(const ContactEstimate& estimate, const Vec3& measured_position,
                          double measurement_noise_var);

/// Intersect the k-sigma ellipsoid with the plan path. Empty when the plan
/// never comes within k sigma of the mean.
std::optional<TransitionRegion> region_of(const ContactEstimate& estimate,
                                          const MotionPlan& plan, double k_sigma);

/// Approach-velocity adaptation toward a desired impact force:
/// v += beta (F_d - F_m), clamped to (0, max_velocity]. Records the
/// (previous velocity, measured force) pair in the linear model.
void update_approach_velocity(ImpactModel& model, double desired_force, double measured_force,
                              double max_velocity);

}  // namespace cct
