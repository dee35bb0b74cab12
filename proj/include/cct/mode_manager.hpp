#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cct/controller.hpp"
#include "cct/forward_model.hpp"
#include "cct/mixture.hpp"
#include "cct/plan.hpp"
#include "cct/robot_state.hpp"

namespace cct {

/// Contact-mode feature: measured force magnitude normalised by the applied
/// normal force, so the mode signature is independent of load and motion
/// direction.
struct ModeFeature {
  double value = 0.0;
};

ModeFeature mode_feature(const Wrench& measured, double normal_force, double r_min);

/// Estimated applied normal force: the commanded force-target magnitude
/// when force control is active, the measured force magnitude otherwise.
double normal_force_estimate(const RobotState& state, const PlanSample& target, double r_min);

/// Streaming cluster statistics; sums merge associatively.
struct ClusterSummary {
  double count = 0.0;
  double linear_sum = 0.0;
  double square_sum = 0.0;

  void absorb(double v) {
    count += 1.0;
    linear_sum += v;
    square_sum += v * v;
  }
  void absorb(const ClusterSummary& other) {
    count += other.count;
    linear_sum += other.linear_sum;
    square_sum += other.square_sum;
  }
  double centroid() const { return count > 0.0 ? linear_sum / count : 0.0; }
  double radius() const {
    if (count <= 0.0) return 0.0;
    const double m = centroid();
    const double v = square_sum / count - m * m;
    return v > 0.0 ? std::sqrt(v) : 0.0;
  }
};

struct ModeManagerConfig {
  int batch_size = 50;
  /// Prefix length at which a confident match to an existing cluster is
  /// accepted early; a new mode always requires the full batch.
  int min_batch = 10;
  double confidence_threshold = 0.85;
  double cluster_distance = 0.06;
  /// Criterion (a): tick-to-tick jump of the motion-axis force magnitude.
  double force_jump_threshold = 0.25;  // N
  /// Criterion (b): sustained error against a frozen snapshot of the
  /// active mode's model.
  double drift_error_threshold = 0.4;  // N
  int drift_dwell = 12;
  int refractory_ticks = 40;
  int settle_ticks = 4;
  double r_min = 0.5;  // N, clamp for the feature denominator
};

struct ModeEvent {
  long tick = 0;
  std::string trigger;  // "jump", "drift", "forced", "initial"
  int winner = -1;
  double confidence = 0.0;
  int runner_up = -1;
  double runner_up_confidence = 0.0;
  bool new_mode = false;
};

struct ModeEntry {
  int id = 0;
  ClusterSummary summary;
  MixtureModel model;
};

struct ClassifyResult {
  bool new_mode = false;
  int mode_id = -1;
  double confidence = 0.0;
  int runner_up = -1;
  double runner_up_confidence = 0.0;
};

/// Flat registry of mode clusters, each bound to one forward model.
class ModeRegistry {
 public:
  explicit ModeRegistry(ModeManagerConfig config, IgmmConfig model_config)
      : config_(config), model_config_(model_config) {}

  /// Assign a batch of features to the nearest clusters; a confident winner
  /// absorbs its assigned features, anything else spawns a new mode.
  ClassifyResult classify_batch(const std::vector<double>& features);

  /// Classification preview over a prefix without mutating the registry.
  ClassifyResult peek_classify(const std::vector<double>& features) const;

  const std::vector<ModeEntry>& modes() const { return modes_; }
  std::vector<ModeEntry>& modes() { return modes_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const ModeManagerConfig& config() const { return config_; }
  int next_id() const { return next_id_; }
  int allocate_id() { return next_id_++; }
  void set_next_id(int id) { next_id_ = id; }

 private:
  ModeManagerConfig config_;
  IgmmConfig model_config_;
  std::vector<ModeEntry> modes_;
  int next_id_ = 0;

  ClassifyResult evaluate(const std::vector<double>& features) const;
};

enum class ModePhase { Normal, Collect };

struct ModeStepOutput {
  Wrench u;                // assembled base-controller command
  double lambda = 0.0;     // activation used this tick
  double eps = 0.0;        // smoothed prediction error
  double raw_pred_err = -1.0;  // unsmoothed one-step error; -1 when absent
  AxisVec kp = AxisVec::Zero();
  Wrench feedforward;      // weighted feed-forward component of u
  ModePhase phase = ModePhase::Normal;
  int active_mode = -1;
  bool change_detected = false;
  std::optional<ModeEvent> event;
};

/// Per-trial mode-aware base controller: detects contact changes, routes
/// control through the active mode's forward model, and manages the
/// high-stiffness classification window.
class ModeManager {
 public:
  ModeManager(ModeManagerConfig config, IgmmConfig model_config, GainConfig gains);

  /// One control tick. `u_fc` is the already-computed force-control term
  /// shared with any concurrently evaluated controller.
  ModeStepOutput step(const RobotState& state, const PlanSample& target, const Vec3& u_fc,
                      const Vec3& gravity_force, long tick);

  /// Request reclassification without a sensor trigger (used when an
  /// anticipated transition completes).
  void force_reclassification();

  /// Register a prebuilt model as a mode and make it active (pretrained
  /// baselines, store restore).
  int seed_mode(MixtureModel model);

  /// Reset per-trial state, keeping the learned registry.
  void begin_trial();

  void restore(std::vector<ModeEntry> modes, int active_mode, int next_id);

  const ModeRegistry& registry() const { return registry_; }
  ModeRegistry& registry() { return registry_; }
  int active_mode() const { return active_mode_; }
  const GainConfig& gains() const { return gains_; }

  /// Two-criterion change test over consecutive effect readings; exposed
  /// for direct verification.
  bool detect_mode_change(double effect_force_prev, double effect_force_now,
                          std::optional<double> frozen_prediction);

 private:
  ModeManagerConfig config_;
  IgmmConfig model_config_;
  GainConfig gains_;
  ModeRegistry registry_;

  int active_mode_ = -1;
  ModePhase phase_ = ModePhase::Collect;  // empty registry starts collecting
  std::string pending_trigger_ = "initial";
  int settle_countdown_ = 0;
  int refractory_countdown_ = 0;
  int drift_count_ = 0;
  std::vector<double> batch_;

  double lambda_ = 0.0;
  double eps_smoothed_ = 0.0;
  AxisVec kp_;
  bool have_prev_ = false;
  FeatureState prev_feature_;
  double prev_effect_force_ = 0.0;
  std::optional<GmrPrediction> pending_prediction_;
  std::optional<MixtureModel> frozen_snapshot_;

  MixtureModel* active_model();
  const MixtureModel* frozen_model() const {
    return frozen_snapshot_ ? &*frozen_snapshot_ : nullptr;
  }
  void enter_collect(const std::string& trigger);
  void confirm_mode(const ClassifyResult& result, long tick, ModeStepOutput& out);
};

}  // namespace cct
