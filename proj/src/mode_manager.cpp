#include "cct/mode_manager.hpp"

#include <algorithm>
#include <cmath>

namespace cct {

ModeFeature mode_feature(const Wrench& measured, double normal_force, double r_min) {
  const double r = std::max(normal_force, r_min);
  return {measured.force.norm() / r};
}

double normal_force_estimate(const RobotState& state, const PlanSample& target, double r_min) {
  double target_sq = 0.0;
  bool any = false;
  for (int i = 0; i < 3; ++i)
    if (target.force_axes[i]) {
      any = true;
      target_sq += target.force_target[i] * target.force_target[i];
    }
  const double r = any ? std::sqrt(target_sq) : state.measured_wrench.force.norm();
  return std::max(r, r_min);
}

ClassifyResult ModeRegistry::evaluate(const std::vector<double>& features) const {
  ClassifyResult out;
  if (modes_.empty() || features.empty()) {
    out.new_mode = true;
    return out;
  }
  std::vector<int> assigned(modes_.size(), 0);
  for (double f : features) {
    double best = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    for (size_t m = 0; m < modes_.size(); ++m) {
      const double d = std::abs(f - modes_[m].summary.centroid());
      if (d < best) {
        best = d;
        best_idx = static_cast<int>(m);
      }
    }
    if (best_idx >= 0 && best <= config_.cluster_distance) ++assigned[best_idx];
  }
  int win = -1, second = -1;
  for (size_t m = 0; m < modes_.size(); ++m) {
    if (win < 0 || assigned[m] > assigned[win]) {
      second = win;
      win = static_cast<int>(m);
    } else if (second < 0 || assigned[m] > assigned[second]) {
      second = static_cast<int>(m);
    }
  }
  const double n = static_cast<double>(features.size());
  out.mode_id = modes_[win].id;
  out.confidence = assigned[win] / n;
  if (second >= 0) {
    out.runner_up = modes_[second].id;
    out.runner_up_confidence = assigned[second] / n;
  }
  out.new_mode = out.confidence < config_.confidence_threshold;
  return out;
}

ClassifyResult ModeRegistry::peek_classify(const std::vector<double>& features) const {
  return evaluate(features);
}

ClassifyResult ModeRegistry::classify_batch(const std::vector<double>& features) {
  ClassifyResult result = evaluate(features);
  if (result.new_mode) {
    ModeEntry entry;
    entry.id = next_id_++;
    for (double f : features) entry.summary.absorb(f);
    entry.model = MixtureModel(model_config_);
    modes_.push_back(std::move(entry));
    result.mode_id = modes_.back().id;
    return result;
  }
  // The winner absorbs the features it claimed.
  for (auto& m : modes_) {
    if (m.id != result.mode_id) continue;
    for (double f : features)
      if (std::abs(f - m.summary.centroid()) <= config_.cluster_distance) m.summary.absorb(f);
    break;
  }
  return result;
}

ModeManager::ModeManager(ModeManagerConfig config, IgmmConfig model_config, GainConfig gains)
    : config_(config), model_config_(model_config), gains_(gains),
      registry_(config, model_config), kp_(gains.kp_max) {
  gains_.validate();
  settle_countdown_ = config_.settle_ticks;
}

MixtureModel* ModeManager::active_model() {
  for (auto& m : registry_.modes())
    if (m.id == active_mode_) return &m.model;
  return nullptr;
}

void ModeManager::begin_trial() {
  have_prev_ = false;
  pending_prediction_.reset();
  drift_count_ = 0;
  refractory_countdown_ = 0;
  lambda_ = 0.0;
  eps_smoothed_ = 0.0;
  kp_ = gains_.kp_max;
  if (registry_.size() == 0 || active_mode_ < 0) {
    phase_ = ModePhase::Collect;
    pending_trigger_ = "initial";
    settle_countdown_ = config_.settle_ticks;
    batch_.clear();
  } else {
    phase_ = ModePhase::Normal;
    if (MixtureModel* m = active_model()) frozen_snapshot_ = *m;
  }
}

void ModeManager::enter_collect(const std::string& trigger) {
  phase_ = ModePhase::Collect;
  pending_trigger_ = trigger;
  settle_countdown_ = config_.settle_ticks;
  batch_.clear();
  drift_count_ = 0;
  pending_prediction_.reset();
  lambda_ = 0.0;
}

void ModeManager::force_reclassification() {
  if (phase_ != ModePhase::Collect) enter_collect("forced");
}

int ModeManager::seed_mode(MixtureModel model) {
  ModeEntry entry;
  entry.id = registry_.allocate_id();
  entry.model = std::move(model);
  registry_.modes().push_back(std::move(entry));
  active_mode_ = registry_.modes().back().id;
  phase_ = ModePhase::Normal;
  frozen_snapshot_ = registry_.modes().back().model;
  have_prev_ = false;
  pending_prediction_.reset();
  return active_mode_;
}

void ModeManager::restore(std::vector<ModeEntry> modes, int active_mode, int next_id) {
  registry_.modes() = std::move(modes);
  registry_.set_next_id(next_id);
  active_mode_ = active_mode;
  begin_trial();
}

bool ModeManager::detect_mode_change(double effect_force_prev, double effect_force_now,
                                     std::optional<double> frozen_prediction) {
  if (std::abs(effect_force_now - effect_force_prev) > config_.force_jump_threshold) {
    drift_count_ = 0;
    return true;
  }
  if (frozen_prediction &&
      std::abs(effect_force_now - *frozen_prediction) > config_.drift_error_threshold) {
    if (++drift_count_ >= config_.drift_dwell) {
      drift_count_ = 0;
      return true;
    }
  } else {
    drift_count_ = 0;
  }
  return false;
}

void ModeManager::confirm_mode(const ClassifyResult& result, long tick, ModeStepOutput& out) {
  active_mode_ = result.mode_id;
  phase_ = ModePhase::Normal;
  refractory_countdown_ = config_.refractory_ticks;
  pending_prediction_.reset();
  have_prev_ = false;
  lambda_ = 0.0;
  eps_smoothed_ = 0.0;
  if (MixtureModel* m = active_model()) frozen_snapshot_ = *m;

  ModeEvent ev;
  ev.tick = tick;
  ev.trigger = pending_trigger_;
  ev.winner = result.mode_id;
  ev.confidence = result.confidence;
  ev.runner_up = result.runner_up;
  ev.runner_up_confidence = result.runner_up_confidence;
  ev.new_mode = result.new_mode;
  out.event = ev;
}

ModeStepOutput ModeManager::step(const RobotState& state, const PlanSample& target,
                                 const Vec3& u_fc, const Vec3& gravity_force, long tick) {
  ModeStepOutput out;
  const FeatureState feature_now = feature_of(state, target.force_axes);
  const InteractionEffect effect_now = effect_of(state, target.force_axes);
  const double normal_force = normal_force_estimate(state, target, config_.r_min);

  // Change detection runs in every phase; during collection it restarts the
  // batch. The refractory window after a confirmed transition and the
  // settle window after a trigger are excluded.
  bool detected = false;
  if (have_prev_ && refractory_countdown_ == 0 && settle_countdown_ == 0) {
    std::optional<double> frozen_pred;
    if (phase_ == ModePhase::Normal && frozen_model() && frozen_model()->observation_count() > 0)
      if (auto p = frozen_model()->predict(prev_feature_.vec())) frozen_pred = p->mean[0];
    detected = detect_mode_change(prev_effect_force_, effect_now.force_mag, frozen_pred);
  }
  out.change_detected = detected;

  if (detected) {
    // A fresh trigger restarts any collection already underway.
    enter_collect(std::abs(effect_now.force_mag - prev_effect_force_) >
                          config_.force_jump_threshold
                      ? "jump"
                      : "drift");
  }

  if (refractory_countdown_ > 0) --refractory_countdown_;

  if (phase_ == ModePhase::Collect) {
    if (settle_countdown_ > 0) {
      --settle_countdown_;
    } else {
      batch_.push_back(mode_feature(state.measured_wrench, normal_force, config_.r_min).value);
      const int prefix = static_cast<int>(batch_.size());
      bool confirmed = false;
      ClassifyResult result;
      if (prefix >= config_.min_batch && prefix < config_.batch_size) {
        // A confident match to a known mode ends the high-stiffness window
        // early; new modes always wait for the full batch.
        result = registry_.peek_classify(batch_);
        if (!result.new_mode) {
          registry_.classify_batch(batch_);
          confirmed = true;
        }
      }
      if (!confirmed && prefix >= config_.batch_size) {
        result = registry_.classify_batch(batch_);
        confirmed = true;
      }
      if (confirmed) confirm_mode(result, tick, out);
    }

    // High-stiffness fixed control during collection (Collect may have just
    // ended this tick; the gains switch from the next tick onward).
    kp_ = gains_.kp_max;
    out.u = motion_feedback(state, target, kp_, damping_of(kp_, gains_));
    out.u.force += u_fc;
    out.u.force -= gravity_force;
    out.lambda = 0.0;
    out.eps = eps_smoothed_;
    out.kp = kp_;
    out.phase = (phase_ == ModePhase::Collect) ? ModePhase::Collect : ModePhase::Normal;
    out.active_mode = active_mode_;
    prev_feature_ = feature_now;
    prev_effect_force_ = effect_now.force_mag;
    have_prev_ = true;
    return out;
  }

  // Normal operation in the active mode.
  MixtureModel* model = active_model();

  // Error of the prediction made last tick for this tick.
  double eps_now;
  if (pending_prediction_) {
    eps_now = prediction_error(pending_prediction_->mean, effect_now,
                               gains_.torque_error_scale);
    out.raw_pred_err = eps_now;
  } else {
    // No usable prediction: treat the error as maximal so the controller
    // leans on feedback.
    eps_now = std::numeric_limits<double>::max();
  }

  // Eq.-style causality: the command uses the previous tick's activation.
  const double lambda_prev = lambda_;
  AxisVec kp_target = stiffness_of(lambda_prev, gains_);
  if (gains_.gain_slew > 0.0) {
    for (int i = 0; i < 4; ++i)
      kp_[i] += std::clamp(kp_target[i] - kp_[i], -gains_.gain_slew, gains_.gain_slew);
  } else {
    kp_ = kp_target;
  }
  const AxisVec kd = damping_of(kp_, gains_);

  Wrench w_pred;
  if (pending_prediction_) {
    InteractionEffect predicted{std::max(0.0, pending_prediction_->mean[0]),
                                std::max(0.0, pending_prediction_->mean[1])};
    // direction_recovery reconstructs the predicted reaction; the
    // compensating feed-forward is its negation.
    w_pred = -direction_recovery(predicted, state.linear_velocity, state.angular_velocity,
                                 gains_.ff_speed_deadband);
  }

  out.u = motion_feedback(state, target, kp_, kd);
  out.u.force += u_fc;
  out.u.force -= gravity_force;
  out.feedforward = lambda_prev * w_pred;
  out.u += out.feedforward;

  // Learn, then refresh the activation and the next-tick prediction.
  if (model && !model->frozen() && have_prev_)
    model->update(joint_point(prev_feature_, effect_now));

  if (eps_now == std::numeric_limits<double>::max()) {
    lambda_ = 0.0;
    eps_smoothed_ = 2.0 * gains_.logistic_midpoint;
  } else {
    eps_smoothed_ = gains_.eps_smoothing * eps_smoothed_ +
                    (1.0 - gains_.eps_smoothing) * eps_now;
    lambda_ = lambda_of_error(eps_smoothed_, gains_);
  }

  pending_prediction_.reset();
  if (model && model->observation_count() > 0)
    if (auto p = model->predict(feature_now.vec())) pending_prediction_ = p;

  out.lambda = lambda_prev;
  out.eps = eps_smoothed_;
  out.kp = kp_;
  out.phase = ModePhase::Normal;
  out.active_mode = active_mode_;

  prev_feature_ = feature_now;
  prev_effect_force_ = effect_now.force_mag;
  have_prev_ = true;
  return out;
}

}  // namespace cct
