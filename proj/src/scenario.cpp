#include "cct/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cct {

using nlohmann::json;

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Avic: return "avic";
    case ControllerKind::FixedGain: return "fixed_gain";
    case ControllerKind::AvicNoAnticipation: return "avic_no_anticipation";
  }
  return "avic";
}

std::string to_string(ModelPolicy policy) {
  return policy == ModelPolicy::Incremental ? "incremental" : "frozen_pretrained";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "avic") return ControllerKind::Avic;
  if (s == "fixed_gain") return ControllerKind::FixedGain;
  if (s == "avic_no_anticipation") return ControllerKind::AvicNoAnticipation;
  throw std::invalid_argument("unknown controller kind: " + s);
}

ModelPolicy model_policy_from_string(const std::string& s) {
  if (s == "incremental") return ModelPolicy::Incremental;
  if (s == "frozen_pretrained") return ModelPolicy::FrozenPretrained;
  throw std::invalid_argument("unknown model policy: " + s);
}

namespace {

Vec3 vec3_of(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

AxisVec axis_of(const json& j) {
  return AxisVec(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                 j.at(3).get<double>());
}

EnvironmentSpec environment_of(const json& j) {
  EnvironmentSpec env;
  env.variant = j.value("variant", "custom");
  if (j.contains("gravity")) env.gravity = vec3_of(j.at("gravity"));
  env.effector_mass = j.value("effector_mass", 1.0);
  env.effector_inertia = j.value("effector_inertia", 0.01);
  env.friction_deadband = j.value("friction_deadband", 1e-4);
  if (j.contains("springs")) {
    for (const auto& js : j.at("springs")) {
      Spring s;
      s.anchor = vec3_of(js.at("anchor"));
      s.rest_length = js.value("rest_length", 0.0);
      s.stiffness = js.at("stiffness").get<double>();
      env.springs.push_back(s);
    }
  }
  if (j.contains("porridge")) {
    PorridgeSpec p;
    const auto& jp = j.at("porridge");
    p.viscosity_start = jp.value("viscosity_start", 0.0);
    p.viscosity_rate = jp.value("viscosity_rate", 0.0);
    p.viscosity_max = jp.value("viscosity_max", -1.0);
    env.porridge = p;
  }
  if (j.contains("friction_regions")) {
    for (const auto& jf : j.at("friction_regions")) {
      FrictionPatch f;
      f.lo = vec3_of(jf.at("lo"));
      f.hi = vec3_of(jf.at("hi"));
      f.mu = jf.at("mu").get<double>();
      f.blend_width = jf.value("blend_width", 0.0);
      env.friction_patches.push_back(f);
    }
  }
  if (j.contains("walls")) {
    for (const auto& jw : j.at("walls")) {
      Wall w;
      w.point = vec3_of(jw.at("point"));
      w.normal = vec3_of(jw.at("normal")).normalized();
      w.stiffness = jw.at("stiffness").get<double>();
      w.damping = jw.value("damping", 0.0);
      env.walls.push_back(w);
    }
  }
  env.validate();
  return env;
}

SimConfig sim_of(const json& j) {
  SimConfig c;
  c.timestep = j.at("timestep").get<double>();
  c.trial_steps = j.at("trial_steps").get<long>();
  c.wrench_noise_std = j.value("wrench_noise_std", 0.0);
  c.pose_noise_std = j.value("pose_noise_std", 0.0);
  c.rng_seed = j.value("rng_seed", 0ull);
  c.speed_limit = j.value("speed_limit", 50.0);
  c.validate();
  return c;
}

GainConfig gains_of(const json& j) {
  GainConfig g;
  if (j.contains("kp_free")) g.kp_free = axis_of(j.at("kp_free"));
  if (j.contains("kp_max")) g.kp_max = axis_of(j.at("kp_max"));
  g.logistic_rate = j.value("logistic_rate", g.logistic_rate);
  g.logistic_midpoint = j.value("logistic_midpoint", g.logistic_midpoint);
  g.force_kp = j.value("force_kp", g.force_kp);
  g.force_ki = j.value("force_ki", g.force_ki);
  g.force_integral_limit = j.value("force_integral_limit", g.force_integral_limit);
  g.conventional_damping = j.value("conventional_damping", false);
  g.gain_slew = j.value("gain_slew", g.gain_slew);
  g.ff_speed_deadband = j.value("ff_speed_deadband", g.ff_speed_deadband);
  g.torque_error_scale = j.value("torque_error_scale", g.torque_error_scale);
  g.eps_smoothing = j.value("eps_smoothing", g.eps_smoothing);
  g.validate();
  return g;
}

IgmmConfig model_of(const json& j) {
  IgmmConfig m;
  m.novelty_threshold = j.value("novelty_threshold", m.novelty_threshold);
  if (j.contains("initial_std")) {
    const auto& js = j.at("initial_std");
    for (int i = 0; i < kPointDim; ++i) m.initial_std[i] = js.at(i).get<double>();
  }
  m.max_components = j.value("max_components", m.max_components);
  m.merge_distance = j.value("merge_distance", m.merge_distance);
  m.spd_floor = j.value("spd_floor", m.spd_floor);
  return m;
}

ModeManagerConfig mode_of(const json& j) {
  ModeManagerConfig m;
  m.batch_size = j.value("batch_size", m.batch_size);
  m.min_batch = j.value("min_batch", m.min_batch);
  m.confidence_threshold = j.value("confidence_threshold", m.confidence_threshold);
  m.cluster_distance = j.value("cluster_distance", m.cluster_distance);
  m.force_jump_threshold = j.value("force_jump_threshold", m.force_jump_threshold);
  m.drift_error_threshold = j.value("drift_error_threshold", m.drift_error_threshold);
  m.drift_dwell = j.value("drift_dwell", m.drift_dwell);
  m.refractory_ticks = j.value("refractory_ticks", m.refractory_ticks);
  m.settle_ticks = j.value("settle_ticks", m.settle_ticks);
  m.r_min = j.value("r_min", m.r_min);
  return m;
}

TransitionConfig transition_of(const json& j) {
  TransitionConfig t;
  t.profile_duration = j.value("profile_duration", t.profile_duration);
  t.kp_low_scale = j.value("kp_low_scale", t.kp_low_scale);
  t.min_blend_time = j.value("min_blend_time", t.min_blend_time);
  return t;
}

AnticipationConfig anticipation_of(const json& j) {
  AnticipationConfig a;
  a.k_sigma = j.value("k_sigma", a.k_sigma);
  a.process_noise_var = j.value("process_noise_var", a.process_noise_var);
  a.measurement_noise_var = j.value("measurement_noise_var", a.measurement_noise_var);
  a.desired_impact_force = j.value("desired_impact_force", a.desired_impact_force);
  a.impact_learning_rate = j.value("impact_learning_rate", a.impact_learning_rate);
  a.initial_approach_velocity =
      j.value("initial_approach_velocity", a.initial_approach_velocity);
  a.discovery_prior_std = j.value("discovery_prior_std", a.discovery_prior_std);
  a.association_gate = j.value("association_gate", a.association_gate);
  a.impact_window = j.value("impact_window", a.impact_window);
  a.baseline_window = j.value("baseline_window", a.baseline_window);
  return a;
}

}  // namespace

Scenario Scenario::from_json_string(const std::string& text, const std::string& base_dir) {
  const json j = json::parse(text);
  Scenario s;
  s.name = j.value("name", "scenario");
  s.environment = environment_of(j.at("environment"));
  s.sim = sim_of(j.at("sim"));

  if (j.contains("plan_file")) {
    const auto path = std::filesystem::path(base_dir) / j.at("plan_file").get<std::string>();
    s.plan = MotionPlan::load(path.string());
  } else {
    s.plan = MotionPlan::from_json_string(j.at("plan").dump());
  }

  if (j.contains("initial")) {
    const auto& ji = j.at("initial");
    if (ji.contains("position")) s.initial_state.position = vec3_of(ji.at("position"));
    if (ji.contains("velocity")) s.initial_state.linear_velocity = vec3_of(ji.at("velocity"));
    s.initial_state.orientation = ji.value("orientation", 0.0);
  } else {
    s.initial_state.position = s.plan.waypoints().front().position;
    s.initial_state.orientation = s.plan.waypoints().front().orientation;
  }

  s.controller = controller_kind_from_string(j.value("controller", "avic"));
  s.model_policy = model_policy_from_string(j.value("model_policy", "incremental"));
  s.trials = j.value("trials", 1);
  if (s.trials < 1) throw std::invalid_argument("trials must be >= 1");
  s.persist_models = j.value("persist_models", true);
  s.persist_estimates = j.value("persist_estimates", true);

  if (j.contains("gains")) s.gains = gains_of(j.at("gains"));
  if (j.contains("fixed_kp")) s.fixed_kp = axis_of(j.at("fixed_kp"));
  if (j.contains("model")) s.model = model_of(j.at("model"));
  if (j.contains("mode")) s.mode = mode_of(j.at("mode"));
  if (j.contains("transition")) s.transition = transition_of(j.at("transition"));
  if (j.contains("anticipation")) s.anticipation = anticipation_of(j.at("anticipation"));

  if (j.contains("priors")) {
    for (const auto& jp : j.at("priors")) {
      ContactPrior p;
      p.mean = vec3_of(jp.at("mean"));
      p.sigma = vec3_of(jp.at("sigma"));
      p.kind = jp.value("kind", std::string("impact")) == "impact_less"
                   ? ContactKind::ImpactLess
                   : ContactKind::Impact;
      p.plan_anchor = jp.value("plan_anchor", 0);
      s.priors.push_back(p);
    }
  }

  if (j.contains("pretrain_scenario")) {
    const auto path =
        std::filesystem::path(base_dir) / j.at("pretrain_scenario").get<std::string>();
    s.pretrain_scenario = path.string();
  }
  s.pretrain_components = j.value("pretrain_components", 6);
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text, std::filesystem::path(path).parent_path().string());
}

}  // namespace cct
