#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cct/anticipation.hpp"
#include "cct/controller.hpp"
#include "cct/environment.hpp"
#include "cct/mixture.hpp"
#include "cct/mode_manager.hpp"
#include "cct/plan.hpp"
#include "cct/sim.hpp"
#include "cct/transition.hpp"

namespace cct {

enum class ControllerKind { Avic, FixedGain, AvicNoAnticipation };
enum class ModelPolicy { Incremental, FrozenPretrained };

std::string to_string(ControllerKind kind);
std::string to_string(ModelPolicy policy);
ControllerKind controller_kind_from_string(const std::string& s);
ModelPolicy model_policy_from_string(const std::string& s);

struct ContactPrior {
  Vec3 mean = Vec3::Zero();
  Vec3 sigma = Vec3::Ones();  // per-axis standard deviation
  ContactKind kind = ContactKind::Impact;
  int plan_anchor = 0;
};

struct AnticipationConfig {
  double k_sigma = 2.0;
  double process_noise_var = 0.0;       // added once per trial
  double measurement_noise_var = 1e-4;  // contact-position measurement
  double desired_impact_force = 8.0;    // N
  double impact_learning_rate = 0.005;  // m/(s·N)
  double initial_approach_velocity = 0.05;  // m/s
  double discovery_prior_std = 0.1;     // for contacts found mid-trial
  double association_gate = 0.25;       // m
  double impact_window = 0.06;          // s, peak-force search after contact
  double baseline_window = 0.03;        // s, pre-contact force baseline
};

struct Scenario {
  std::string name;
  EnvironmentSpec environment;
  SimConfig sim;
  MotionPlan plan;
  RobotState initial_state;
  ControllerKind controller = ControllerKind::Avic;
  ModelPolicy model_policy = ModelPolicy::Incremental;
  int trials = 1;
  bool persist_models = true;
  bool persist_estimates = true;
  GainConfig gains;
  AxisVec fixed_kp = AxisVec(400.0, 400.0, 400.0, 40.0);
  IgmmConfig model;
  ModeManagerConfig mode;
  TransitionConfig transition;
  AnticipationConfig anticipation;
  std::vector<ContactPrior> priors;
  /// Frozen-model policy: scenario run to gather training data, and the
  /// component count of the batch fit.
  std::string pretrain_scenario;
  int pretrain_components = 6;

  static Scenario load(const std::string& path);
  static Scenario from_json_string(const std::string& text, const std::string& base_dir = ".");
};

}  // namespace cct
