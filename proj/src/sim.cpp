#include "cct/sim.hpp"

#include <cmath>
#include <sstream>

namespace cct {

Simulator::Simulator(EnvironmentSpec spec, SimConfig config, RobotState initial)
    : spec_(std::move(spec)), config_(config), true_(initial), prev_true_(initial),
      rng_(config.rng_seed) {
  spec_.validate();
  config_.validate();
  if (!true_.finite()) throw std::invalid_argument("initial state must be finite");
  reaction_ = environment_reaction(spec_, true_, 0);
  prev_reaction_ = reaction_;
  true_.measured_wrench = -reaction_.wrench;
  observed_ = true_;
}

const RobotState& Simulator::step(const Wrench& applied) {
  if (!is_finite(applied)) throw SimDivergence("non-finite applied wrench");

  const double dt = config_.timestep;
  const double m = spec_.effector_mass;
  const double inertia = spec_.effector_inertia;

  const Vec3 net_force = applied.force + reaction_.wrench.force + spec_.gravity * m;
  const double net_torque = applied.torque + reaction_.wrench.torque;

  RobotState next;
  next.linear_velocity = true_.linear_velocity + dt * net_force / m;
  next.angular_velocity = true_.angular_velocity + dt * net_torque / inertia;
  next.position = true_.position + dt * next.linear_velocity;
  next.orientation = true_.orientation + dt * next.angular_velocity;
  next.time = true_.time + dt;

  if (!next.position.allFinite() || !next.linear_velocity.allFinite() ||
      next.linear_velocity.norm() > config_.speed_limit) {
    std::ostringstream msg;
    msg << "simulation diverged at t=" << true_.time << " (speed "
        << next.linear_velocity.norm() << " m/s, limit " << config_.speed_limit << ")";
    throw SimDivergence(msg.str());
  }

  ++step_index_;
  prev_true_ = true_;
  prev_reaction_ = reaction_;
  true_ = next;
  reaction_ = environment_reaction(spec_, true_, step_index_);
  true_.measured_wrench = -reaction_.wrench;

  observed_ = true_;
  if (config_.wrench_noise_std > 0.0) {
    for (int i = 0; i < 3; ++i)
      observed_.measured_wrench.force[i] += rng_.gaussian(0.0, config_.wrench_noise_std);
    observed_.measured_wrench.torque += rng_.gaussian(0.0, 0.1 * config_.wrench_noise_std);
  }
  if (config_.pose_noise_std > 0.0) {
    for (int i = 0; i < 3; ++i)
      observed_.position[i] += rng_.gaussian(0.0, config_.pose_noise_std);
  }

  // Contact onset detection on the true geometry; the reported position is
  // a measurement and carries pose noise.
  event_.reset();
  for (const auto& contact : reaction_.wall_contacts) {
    bool was_in_contact = false;
    for (const auto& prev : prev_reaction_.wall_contacts)
      if (prev.wall_index == contact.wall_index) was_in_contact = true;
    if (!was_in_contact) {
      ContactObservation obs;
      obs.position = observed_.position;
      obs.true_position = true_.position;
      obs.normal = spec_.walls[contact.wall_index].normal;
      obs.peak_force = contact.normal_force;
      obs.kind = ContactKind::Impact;
      obs.wall_index = contact.wall_index;
      event_ = obs;
      return observed_;
    }
  }

  if (!spec_.friction_patches.empty() && !reaction_.wall_contacts.empty() &&
      !prev_reaction_.wall_contacts.empty()) {
    const int patch_prev = spec_.friction_patch_index_at(prev_true_.position);
    const int patch_next = spec_.friction_patch_index_at(true_.position);
    if (patch_prev != patch_next) {
      // Bisect the segment for the boundary-crossing point.
      Vec3 a = prev_true_.position;
      Vec3 b = true_.position;
      for (int i = 0; i < 60; ++i) {
        const Vec3 mid = 0.5 * (a + b);
        if (spec_.friction_patch_index_at(mid) == patch_prev)
          a = mid;
        else
          b = mid;
      }
      ContactObservation obs;
      obs.true_position = 0.5 * (a + b);
      obs.position = obs.true_position;
      if (config_.pose_noise_std > 0.0)
        for (int i = 0; i < 3; ++i) obs.position[i] += rng_.gaussian(0.0, config_.pose_noise_std);
      obs.normal = spec_.walls[reaction_.wall_contacts.front().wall_index].normal;
      obs.peak_force = reaction_.wall_contacts.front().normal_force;
      obs.kind = ContactKind::ImpactLess;
      obs.wall_index = reaction_.wall_contacts.front().wall_index;
      event_ = obs;
    }
  }
  return observed_;
}

}  // namespace cct
