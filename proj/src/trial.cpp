#include "cct/trial.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace cct {

std::uint64_t trial_seed(std::uint64_t base, int trial_index) {
  // SplitMix64 step keeps per-trial streams decorrelated and reproducible.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(trial_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

struct WindowRuntime {
  TransitionWindow window;
  int estimate_index = -1;
  TransitionGains gains;
};

double engagement(const TransitionWindow& w, double t) {
  if (t <= w.blend_in_start || t >= w.blend_out_end) return 0.0;
  if (t < w.entry_time) {
    const double span = w.entry_time - w.blend_in_start;
    return span > 0.0 ? (t - w.blend_in_start) / span : 1.0;
  }
  if (t <= w.exit_time) return 1.0;
  const double span = w.blend_out_end - w.exit_time;
  return span > 0.0 ? 1.0 - (t - w.exit_time) / span : 0.0;
}

}  // namespace

TrialResult run_trial(const Scenario& scenario, PersistentState& persistent, int trial_index) {
  const auto t_start = std::chrono::steady_clock::now();

  TrialResult result;
  result.trial_index = trial_index;

  const double dt = scenario.sim.timestep;
  const bool anticipation_on = scenario.controller == ControllerKind::Avic;
  const bool use_manager = scenario.controller != ControllerKind::FixedGain;

  // Seed estimates from the configured priors on the first trial.
  if (trial_index == 0 && persistent.estimates.empty()) {
    for (const auto& prior : scenario.priors) {
      ContactEstimate est;
      est.mean = prior.mean;
      est.cov = prior.sigma.cwiseProduct(prior.sigma).asDiagonal();
      est.kind = prior.kind;
      est.plan_anchor = prior.plan_anchor;
      persistent.estimates.push_back(est);
      ImpactModel im;
      im.approach_velocity = scenario.anticipation.initial_approach_velocity;
      im.learning_rate = scenario.anticipation.impact_learning_rate;
      persistent.impact_models.push_back(im);
      persistent.contact_truths.push_back(Vec3::Zero());
      persistent.truth_known.push_back(false);
    }
  }

  // Kalman prediction step once per trial.
  if (scenario.anticipation.process_noise_var > 0.0)
    for (auto& est : persistent.estimates)
      est = kf_predict(est, scenario.anticipation.process_noise_var);

  result.estimates.resize(persistent.estimates.size());
  for (size_t i = 0; i < persistent.estimates.size(); ++i) {
    auto& info = result.estimates[i];
    info.index = static_cast<int>(i);
    info.kind = persistent.estimates[i].kind;
    info.prior_mean = persistent.estimates[i].mean;
    info.prior_trace = persistent.estimates[i].cov.trace();
    info.approach_velocity = persistent.impact_models[i].approach_velocity;
    if (persistent.truth_known[i]) {
      info.true_position = persistent.contact_truths[i];
      info.has_truth = true;
    }
  }

  // Regions of anticipated transition and the retimed plan.
  MotionPlan effective_plan = scenario.plan;
  std::vector<WindowRuntime> windows;
  if (anticipation_on && !persistent.estimates.empty()) {
    struct Tagged {
      TransitionRegion region;
      int estimate;
    };
    std::vector<Tagged> tagged;
    for (size_t i = 0; i < persistent.estimates.size(); ++i) {
      if (auto region = region_of(persistent.estimates[i], scenario.plan,
                                  scenario.anticipation.k_sigma)) {
        region->estimate_index = static_cast<int>(i);
        tagged.push_back({*region, static_cast<int>(i)});
        auto& info = result.estimates[i];
        info.has_region = true;
        info.region_length = region->length();
        info.region_entry_arc = region->entry_arc;
        info.region_exit_arc = region->exit_arc;
      }
    }
    std::sort(tagged.begin(), tagged.end(),
              [](const Tagged& a, const Tagged& b) { return a.region.entry_arc < b.region.entry_arc; });

    std::vector<TransitionRegion> regions;
    std::vector<double> speeds;
    for (const auto& tr : tagged) {
      regions.push_back(tr.region);
      const double base_speed =
          scenario.plan.segment_speed(scenario.plan.segment_at_arc(tr.region.entry_arc));
      double v2 = base_speed;
      if (tr.region.kind == ContactKind::Impact)
        v2 = std::min(persistent.impact_models[tr.estimate].approach_velocity, base_speed);
      speeds.push_back(std::max(v2, 1e-3));
    }
    RetimeResult rr =
        retime_plan(scenario.plan, regions, speeds, scenario.transition, dt);
    effective_plan = std::move(rr.plan);
    for (size_t i = 0; i < rr.windows.size(); ++i) {
      WindowRuntime wr;
      wr.window = rr.windows[i];
      wr.estimate_index = tagged[i].estimate;
      wr.gains = transition_gains(rr.windows[i].kind, scenario.gains, scenario.transition,
                                  &persistent.impact_models[tagged[i].estimate]);
      windows.push_back(std::move(wr));
      result.windows.push_back(rr.windows[i]);
    }
  }

  // Mode manager setup.
  if (use_manager) {
    if (!persistent.manager || !scenario.persist_models) {
      persistent.manager.emplace(scenario.mode, scenario.model, scenario.gains);
      if (scenario.model_policy == ModelPolicy::FrozenPretrained) {
        if (!persistent.pretrained)
          throw std::runtime_error("frozen_pretrained policy needs a pretrained model");
        persistent.manager->seed_mode(*persistent.pretrained);
      }
    } else {
      persistent.manager->begin_trial();
    }
  }

  SimConfig sim_config = scenario.sim;
  sim_config.rng_seed = trial_seed(scenario.sim.rng_seed, trial_index);
  RobotState initial = scenario.initial_state;
  Simulator sim(scenario.environment, sim_config, initial);

  const Vec3 gravity_force = scenario.environment.gravity * scenario.environment.effector_mass;
  Vec3 force_integral = Vec3::Zero();
  const AxisVec fixed_kd = damping_of(scenario.fixed_kp, scenario.gains);

  const long baseline_ticks =
      std::max<long>(1, static_cast<long>(scenario.anticipation.baseline_window / dt));
  const long impact_ticks =
      std::max<long>(1, static_cast<long>(scenario.anticipation.impact_window / dt));
  std::deque<double> force_history;

  struct PendingPeak {
    size_t contact;
    long end_tick;
  };
  std::vector<PendingPeak> pending_peaks;

  result.rows.reserve(static_cast<size_t>(sim_config.trial_steps));

  for (long tick = 0; tick < sim_config.trial_steps; ++tick) {
    const RobotState& state = sim.state();
    const double t = state.time;
    const PlanSample target = effective_plan.sample(t);

    TickRow row;
    row.tick = tick;
    row.time = t;
    row.position = state.position;
    row.orientation = state.orientation;
    row.velocity = state.linear_velocity;
    row.angular_velocity = state.angular_velocity;
    row.force = state.measured_wrench.force;
    row.torque = state.measured_wrench.torque;
    row.target_position = target.position;
    row.target_speed = target.speed;

    Wrench command;
    try {
      const Vec3 u_fc = force_control_term(state, target, dt, scenario.gains, force_integral);

      Wrench u_base;
      TrialPhase phase = TrialPhase::Normal;
      if (use_manager) {
        ModeStepOutput mo =
            persistent.manager->step(state, target, u_fc, gravity_force, tick);
        u_base = mo.u;
        row.lambda = mo.lambda;
        row.eps = mo.eps;
        row.kp = mo.kp;
        row.feedforward = mo.feedforward.force;
        row.mode = mo.active_mode;
        if (mo.event) result.mode_events.push_back(*mo.event);
        if (mo.phase == ModePhase::Collect) phase = TrialPhase::Collect;
        // Raw one-step prediction error for the report stream.
        row.pred_err = mo.raw_pred_err;
      } else {
        u_base = motion_feedback(state, target, scenario.fixed_kp, fixed_kd);
        u_base.force += u_fc;
        u_base.force -= gravity_force;
        row.kp = scenario.fixed_kp;
      }

      // Chain the engagement of each transition window; overlapping windows
      // compose continuously.
      command = u_base;
      double strongest = 0.0;
      for (const auto& wr : windows) {
        const double beta = engagement(wr.window, t);
        if (beta <= 0.0) continue;
        Wrench u_trans = motion_feedback(state, target, wr.gains.kp, wr.gains.kd);
        u_trans.force += u_fc;
        u_trans.force -= gravity_force;
        command = blend(command, u_trans, beta, 1.0);
        if (beta > strongest) {
          strongest = beta;
          row.region = wr.window.region_index;
          row.kp = wr.gains.kp;
          if (t < wr.window.entry_time)
            phase = TrialPhase::BlendIn;
          else if (t <= wr.window.exit_time)
            phase = TrialPhase::Transition;
          else
            phase = TrialPhase::BlendOut;
        }
      }
      row.phase = static_cast<int>(phase);
      row.command = command.force;
      row.command_torque = command.torque;

      sim.step(command);
    } catch (const SimDivergence& e) {
      result.failed = true;
      result.fail_reason = e.what();
      result.rows.push_back(row);
      break;
    } catch (const ControllerFault& e) {
      result.failed = true;
      result.fail_reason = e.what();
      result.rows.push_back(row);
      break;
    }

    // Track contact onsets and the impact-force window around them.
    const double force_mag = sim.state().measured_wrench.force.norm();
    if (const auto& ev = sim.contact_event()) {
      bool duplicate = false;
      for (const auto& c : result.contacts)
        if (c.kind == ev->kind &&
            (c.observed_position - ev->position).norm() <
                0.5 * scenario.anticipation.association_gate)
          duplicate = true;
      if (!duplicate) {
        ContactRecord rec;
        rec.tick = tick;
        rec.observed_position = ev->position;
        rec.true_position = ev->true_position;
        rec.kind = ev->kind;
        double baseline = 0.0;
        const size_t nb = std::min<size_t>(force_history.size(), baseline_ticks);
        if (nb > 0) {
          for (size_t k = force_history.size() - nb; k < force_history.size(); ++k)
            baseline += force_history[k];
          baseline /= static_cast<double>(nb);
        }
        rec.baseline_force = baseline;
        rec.peak_force = force_mag;

        // Associate with the nearest persisted estimate.
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < persistent.estimates.size(); ++i) {
          if (persistent.estimates[i].kind != ev->kind) continue;
          const double d = (persistent.estimates[i].mean - ev->position).norm();
          if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
          }
        }
        if (best >= 0 && best_dist <= scenario.anticipation.association_gate) {
          rec.estimate_index = best;
        } else {
          rec.discovered = true;  // resolved into a new estimate after the trial
        }
        result.contacts.push_back(rec);
        pending_peaks.push_back({result.contacts.size() - 1, tick + impact_ticks});
      }
    }
    for (auto& pp : pending_peaks)
      if (tick <= pp.end_tick)
        result.contacts[pp.contact].peak_force =
            std::max(result.contacts[pp.contact].peak_force, force_mag);
    std::erase_if(pending_peaks, [&](const PendingPeak& pp) { return tick > pp.end_tick; });

    force_history.push_back(force_mag);
    if (force_history.size() > static_cast<size_t>(baseline_ticks) + 4) force_history.pop_front();

    result.rows.push_back(row);
  }

  // Post-trial estimate updates: one measurement per estimate (the first
  // contact observed for it), then the approach-velocity adaptation.
  std::vector<bool> estimate_updated(persistent.estimates.size(), false);
  for (const auto& rec : result.contacts) {
    if (rec.estimate_index < 0) continue;
    const size_t i = static_cast<size_t>(rec.estimate_index);
    if (estimate_updated[i]) continue;
    estimate_updated[i] = true;

    persistent.estimates[i] = kf_update(persistent.estimates[i], rec.observed_position,
                                        scenario.anticipation.measurement_noise_var);
    persistent.contact_truths[i] = rec.true_position;
    persistent.truth_known[i] = true;

    auto& info = result.estimates[i];
    info.updated = true;
    info.true_position = rec.true_position;
    info.has_truth = true;

    if (persistent.estimates[i].kind == ContactKind::Impact) {
      const double f_m = rec.impact_force();
      info.measured_force = f_m;
      const double anchor_arc = scenario.plan.arc_of_closest_point(rec.observed_position);
      const double plan_speed =
          scenario.plan.segment_speed(scenario.plan.segment_at_arc(anchor_arc));
      update_approach_velocity(persistent.impact_models[i],
                               scenario.anticipation.desired_impact_force, f_m, plan_speed);
    }
  }
  for (size_t i = 0; i < persistent.estimates.size(); ++i) {
    result.estimates[i].posterior_mean = persistent.estimates[i].mean;
    result.estimates[i].posterior_trace = persistent.estimates[i].cov.trace();
  }

  // Contacts discovered this trial spawn estimates for the next one.
  for (const auto& rec : result.contacts) {
    if (!rec.discovered) continue;
    ContactEstimate est;
    est.mean = rec.observed_position;
    const double s0 = scenario.anticipation.discovery_prior_std;
    est.cov = (s0 * s0) * Mat3::Identity();
    est.kind = rec.kind;
    est.plan_anchor =
        scenario.plan.segment_at_arc(scenario.plan.arc_of_closest_point(rec.observed_position));
    persistent.estimates.push_back(est);
    ImpactModel im;
    im.approach_velocity = scenario.anticipation.initial_approach_velocity;
    im.learning_rate = scenario.anticipation.impact_learning_rate;
    persistent.impact_models.push_back(im);
    persistent.contact_truths.push_back(rec.true_position);
    persistent.truth_known.push_back(true);
  }

  result.mode_count = use_manager ? persistent.manager->registry().size() : 0;
  result.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
  return result;
}

}  // namespace cct
