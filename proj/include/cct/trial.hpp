#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cct/scenario.hpp"

namespace cct {

enum class TrialPhase : int {
  Normal = 0,
  BlendIn = 1,
  Transition = 2,
  BlendOut = 3,
  Collect = 4,
};

/// One logged control tick; every report metric derives from these rows.
struct TickRow {
  long tick = 0;
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  double orientation = 0.0;
  Vec3 velocity = Vec3::Zero();
  double angular_velocity = 0.0;
  Vec3 force = Vec3::Zero();
  double torque = 0.0;
  Vec3 target_position = Vec3::Zero();
  double target_speed = 0.0;
  Vec3 command = Vec3::Zero();
  double command_torque = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  double pred_err = -1.0;  // raw one-step force-prediction error; -1 = none
  AxisVec kp = AxisVec::Zero();
  Vec3 feedforward = Vec3::Zero();
  int mode = -1;
  int phase = 0;
  int region = -1;
};

struct ContactRecord {
  int estimate_index = -1;  // -1 until associated or spawned
  long tick = 0;
  Vec3 observed_position = Vec3::Zero();
  Vec3 true_position = Vec3::Zero();  // oracle
  ContactKind kind = ContactKind::Impact;
  double baseline_force = 0.0;
  double peak_force = 0.0;
  bool discovered = false;

  double impact_force() const { return std::max(0.0, peak_force - baseline_force); }
};

/// Per-estimate bookkeeping for one trial.
struct EstimateTrialInfo {
  int index = -1;
  ContactKind kind = ContactKind::Impact;
  Vec3 prior_mean = Vec3::Zero();
  double prior_trace = 0.0;
  Vec3 posterior_mean = Vec3::Zero();
  double posterior_trace = 0.0;
  bool updated = false;
  bool has_region = false;
  double region_length = 0.0;
  double region_entry_arc = 0.0;
  double region_exit_arc = 0.0;
  double approach_velocity = 0.0;  // impact transitions
  double measured_force = -1.0;    // F_m; -1 = no impact measured
  Vec3 true_position = Vec3::Zero();
  bool has_truth = false;
};

struct TrialResult {
  int trial_index = 0;
  bool failed = false;
  std::string fail_reason;
  std::vector<TickRow> rows;
  std::vector<ModeEvent> mode_events;
  std::vector<ContactRecord> contacts;
  std::vector<EstimateTrialInfo> estimates;
  std::vector<TransitionWindow> windows;
  int mode_count = 0;
  double wall_time_ms = 0.0;
};

/// State carried between trials of one scenario run.
struct PersistentState {
  std::optional<ModeManager> manager;
  std::vector<ContactEstimate> estimates;
  std::vector<ImpactModel> impact_models;
  std::vector<Vec3> contact_truths;  // oracle, parallel to estimates
  std::vector<bool> truth_known;
  std::optional<MixtureModel> pretrained;
};

TrialResult run_trial(const Scenario& scenario, PersistentState& persistent, int trial_index);

/// Per-trial RNG stream derived from the scenario seed.
std::uint64_t trial_seed(std::uint64_t base, int trial_index);

}  // namespace cct
