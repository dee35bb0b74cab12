#include "cct/environment.hpp"

#include <algorithm>
#include <cmath>

namespace cct {

void EnvironmentSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(effector_mass > 0.0, "effector_mass must be > 0");
  require(effector_inertia > 0.0, "effector_inertia must be > 0");
  require(gravity.allFinite(), "gravity must be finite");
  for (const auto& s : springs) {
    require(s.stiffness >= 0.0, "spring stiffness must be >= 0");
    require(s.rest_length >= 0.0, "spring rest_length must be >= 0");
  }
  if (porridge) {
    require(porridge->viscosity_start >= 0.0, "viscosity_start must be >= 0");
  }
  for (const auto& f : friction_patches) {
    require(f.mu >= 0.0, "friction coefficient must be >= 0");
    require(f.blend_width >= 0.0, "blend_width must be >= 0");
    require((f.hi - f.lo).minCoeff() >= 0.0, "friction patch hi must be >= lo");
  }
  for (size_t i = 0; i < friction_patches.size(); ++i) {
    for (size_t j = i + 1; j < friction_patches.size(); ++j) {
      const auto& a = friction_patches[i];
      const auto& b = friction_patches[j];
      bool overlap = true;
      for (int k = 0; k < 3; ++k)
        if (a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) overlap = false;
      require(!overlap, "friction patches must not overlap");
    }
  }
  for (const auto& w : walls) {
    require(w.stiffness >= 0.0, "wall stiffness must be >= 0");
    require(w.damping >= 0.0, "wall damping must be >= 0");
    require(std::abs(w.normal.norm() - 1.0) < 1e-9, "wall normal must be unit length");
  }
}

int EnvironmentSpec::friction_patch_index_at(const Vec3& p) const {
  for (size_t i = 0; i < friction_patches.size(); ++i)
    if (friction_patches[i].contains(p)) return static_cast<int>(i);
  return -1;
}

double EnvironmentSpec::friction_mu_at(const Vec3& p) const {
  // Nearest patch wins; inside a blend band the coefficient ramps linearly
  // from the neighbouring value to the patch value.
  const FrictionPatch* inside = nullptr;
  for (const auto& f : friction_patches)
    if (f.contains(p)) {
      inside = &f;
      break;
    }
  if (!inside) return 0.0;
  if (inside->blend_width <= 0.0) return inside->mu;

  const double d = inside->inset(p);
  if (d >= inside->blend_width) return inside->mu;

  // Find the neighbouring patch the blend ramps from: the nearest other
  // patch by boundary distance.
  double best = std::numeric_limits<double>::infinity();
  double neighbour_mu = inside->mu;
  for (const auto& f : friction_patches) {
    if (&f == inside) continue;
    double dist = 0.0;
    for (int k = 0; k < 3; ++k) {
      double lo_gap = f.lo[k] - p[k];
      double hi_gap = p[k] - f.hi[k];
      double g = std::max({lo_gap, hi_gap, 0.0});
      dist += g * g;
    }
    dist = std::sqrt(dist);
    if (dist < best) {
      best = dist;
      neighbour_mu = f.mu;
    }
  }
  const double a = d / inside->blend_width;  // 0 at boundary, 1 at full depth
  return neighbour_mu + a * (inside->mu - neighbour_mu);
}

namespace {

Wrench spring_force(const std::vector<Spring>& springs, const Vec3& p) {
  Wrench w;
  for (const auto& s : springs) {
    const Vec3 d = p - s.anchor;
    const double len = d.norm();
    if (len < 1e-12) continue;
    const double extension = len - s.rest_length;
    w.force += -s.stiffness * extension * (d / len);
  }
  return w;
}

Wrench viscous_force(const PorridgeSpec& porridge, const RobotState& state, long step) {
  const double c = porridge.viscosity_at(step);
  Wrench w;
  w.force = -c * state.linear_velocity;
  w.torque = -c * 0.01 * state.angular_velocity;  // small rotational drag
  return w;
}

// Kinetic friction on the surface tangent plane of a contacting wall.
Vec3 friction_force(const EnvironmentSpec& spec, const RobotState& state, const Vec3& normal,
                    double normal_force) {
  if (normal_force <= 0.0) return Vec3::Zero();
  const double mu = spec.friction_mu_at(state.position);
  if (mu <= 0.0) return Vec3::Zero();
  Vec3 v_tan = state.linear_velocity - normal.dot(state.linear_velocity) * normal;
  const double speed = v_tan.norm();
  if (speed < spec.friction_deadband) return Vec3::Zero();
  return -mu * normal_force * (v_tan / speed);
}

double wall_normal_force(const Wall& wall, const RobotState& state) {
  const double s = wall.signed_distance(state.position);
  if (s >= 0.0) return 0.0;
  const double penetration = -s;
  const double penetration_rate = -wall.normal.dot(state.linear_velocity);
  // No adhesion: the penalty force never pulls the effector in.
  return std::max(0.0, wall.stiffness * penetration + wall.damping * penetration_rate);
}

}  // namespace

EnvironmentReaction environment_reaction(const EnvironmentSpec& spec, const RobotState& state,
                                         long step_index) {
  EnvironmentReaction out;
  out.wrench += spring_force(spec.springs, state.position);
  if (spec.porridge) out.wrench += viscous_force(*spec.porridge, state, step_index);

  for (size_t i = 0; i < spec.walls.size(); ++i) {
    const auto& wall = spec.walls[i];
    const double s = wall.signed_distance(state.position);
    if (s >= 0.0) continue;
    const double fn = wall_normal_force(wall, state);
    out.wall_contacts.push_back({static_cast<int>(i), -s, fn});
    out.wrench.force += fn * wall.normal;
    out.wrench.force += friction_force(spec, state, wall.normal, fn);
  }
  return out;
}

Wrench environment_force(const EnvironmentSpec& spec, const RobotState& state,
                         double normal_force, long step_index) {
  Wrench w;
  w += spring_force(spec.springs, state.position);
  if (spec.porridge) w += viscous_force(*spec.porridge, state, step_index);

  for (const auto& wall : spec.walls) {
    const double s = wall.signed_distance(state.position);
    if (s < 0.0) w.force += wall_normal_force(wall, state) * wall.normal;
  }

  // Friction under the supplied applied load, on the tangent plane of the
  // first wall when one exists, against the full velocity otherwise.
  if (!spec.friction_patches.empty() && normal_force > 0.0) {
    if (!spec.walls.empty()) {
      w.force += friction_force(spec, state, spec.walls.front().normal, normal_force);
    } else {
      const double mu = spec.friction_mu_at(state.position);
      const double speed = state.linear_velocity.norm();
      if (mu > 0.0 && speed >= spec.friction_deadband)
        w.force += -mu * normal_force * (state.linear_velocity / speed);
    }
  }
  return w;
}

}  // namespace cct
