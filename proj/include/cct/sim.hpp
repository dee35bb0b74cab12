#pragma once

#include <optional>
#include <stdexcept>

#include "cct/environment.hpp"
#include "cct/rng.hpp"
#include "cct/robot_state.hpp"

namespace cct {

struct SimConfig {
  double timestep = 0.001;     // s
  long trial_steps = 1000;
  double wrench_noise_std = 0.0;  // N, per force axis
  double pose_noise_std = 0.0;    // m, per position axis
  std::uint64_t rng_seed = 0;
  double speed_limit = 50.0;   // m/s divergence guard

  void validate() const {
    if (!(timestep > 0.0)) throw std::invalid_argument("timestep must be > 0");
    if (trial_steps < 1) throw std::invalid_argument("trial_steps must be >= 1");
    if (wrench_noise_std < 0.0 || pose_noise_std < 0.0)
      throw std::invalid_argument("noise std must be >= 0");
    if (!(speed_limit > 0.0)) throw std::invalid_argument("speed_limit must be > 0");
  }
};

class SimDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ContactKind { Impact, ImpactLess };

struct ContactObservation {
  Vec3 position = Vec3::Zero();       // measured (carries pose noise)
  Vec3 true_position = Vec3::Zero();  // oracle value, for labeled metrics only
  Vec3 normal = Vec3::Zero();
  double peak_force = 0.0;
  ContactKind kind = ContactKind::Impact;
  int wall_index = -1;
};

/// Fixed-timestep plant. Integrates a noiseless true state and exposes a
/// measured view (pose and wrench noise); owns the measurement RNG so
/// seeded trials are bit-reproducible.
class Simulator {
 public:
  Simulator(EnvironmentSpec spec, SimConfig config, RobotState initial);

  /// Semi-implicit Euler update under the applied wrench plus the
  /// environment reaction. The returned (measured) state's wrench is the
  /// negated reaction, the wrist force-torque sensor convention.
  /// Throws SimDivergence when speed exceeds the configured bound.
  const RobotState& step(const Wrench& applied);

  /// Contact onset produced by the last step: a wall penetration that just
  /// began (impact) or a friction-patch boundary crossing while in contact
  /// (impact-less). Position carries measurement noise like any pose.
  const std::optional<ContactObservation>& contact_event() const { return event_; }

  /// Measured state (what the controller and learners see).
  const RobotState& state() const { return observed_; }
  /// Noiseless state, for oracle-assisted metrics and tests only.
  const RobotState& true_state() const { return true_; }

  const EnvironmentSpec& spec() const { return spec_; }
  const SimConfig& config() const { return config_; }
  long step_index() const { return step_index_; }

  /// Reaction at the current true state (energy bookkeeping in tests).
  const EnvironmentReaction& current_reaction() const { return reaction_; }

 private:
  EnvironmentSpec spec_;
  SimConfig config_;
  RobotState true_;
  RobotState prev_true_;
  RobotState observed_;
  EnvironmentReaction prev_reaction_;
  EnvironmentReaction reaction_;
  std::optional<ContactObservation> event_;
  long step_index_ = 0;
  Rng rng_;
};

}  // namespace cct
