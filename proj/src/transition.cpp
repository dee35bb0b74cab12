#include "cct/transition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cct {

TransitionGains transition_gains(ContactKind kind, const GainConfig& gains,
                                 const TransitionConfig& cfg, const ImpactModel* impact) {
  TransitionGains out;
  if (kind == ContactKind::ImpactLess) {
    out.kp = gains.kp_max;
    out.kd = damping_of(out.kp, gains);
    return out;
  }
  out.kp = cfg.kp_low_scale * gains.kp_free;
  out.kd = damping_of(out.kp, gains);
  if (impact) out.approach_velocity = impact->approach_velocity;
  return out;
}

Wrench blend(const Wrench& u1, const Wrench& u2, double t, double T) {
  const double alpha = T > 0.0 ? clamp01(t / T) : 1.0;
  return (1.0 - alpha) * u1 + alpha * u2;
}

double velocity_profile_tau(double v1, double v2, double tau) {
  if (tau <= 0.0) return v1;
  if (tau >= 1.0) return v2;
  // Algebraically e^{-1/tau} / (e^{-1/tau} + e^{-1/(1-tau)}); this form
  // keeps the exponent bounded away from overflow near the endpoints.
  const double exponent = 1.0 / tau - 1.0 / (1.0 - tau);
  if (exponent > 700.0) return v1;
  if (exponent < -700.0) return v2;
  const double weight = 1.0 / (1.0 + std::exp(exponent));
  return v1 + (v2 - v1) * weight;
}

double velocity_profile(const VelocityProfileParams& params, double t) {
  if (!(params.t2 > params.t1)) throw std::invalid_argument("profile needs t2 > t1");
  return velocity_profile_tau(params.v1, params.v2, (t - params.t1) / (params.t2 - params.t1));
}

namespace {

struct RegionPlan {
  TransitionRegion region;
  double v2 = 0.0;
};

}  // namespace

RetimeResult retime_plan(const MotionPlan& plan, const std::vector<TransitionRegion>& regions,
                         const std::vector<double>& target_speeds, const TransitionConfig& cfg,
                         double dt) {
  if (regions.size() != target_speeds.size())
    throw std::invalid_argument("one target speed per region required");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");

  RetimeResult out;
  if (plan.empty() || regions.empty()) {
    out.plan = plan;
    return out;
  }

  std::vector<RegionPlan> rps;
  for (size_t i = 0; i < regions.size(); ++i) {
    if (i > 0 && regions[i].entry_arc < regions[i - 1].entry_arc)
      throw std::invalid_argument("regions must be sorted by entry arc");
    double v2 = target_speeds[i];
    if (!(v2 > 0.0)) throw std::invalid_argument("target speed must be > 0");
    rps.push_back({regions[i], v2});
  }

  const double total = plan.total_arc();
  for (int seg = 0; seg + 1 < static_cast<int>(plan.waypoints().size()); ++seg)
    if (!(plan.segment_speed(seg) > 0.0))
      throw std::invalid_argument("retiming requires strictly positive segment speeds");

  enum class Phase { Cruise, Shape, Hold };
  Phase phase = Phase::Cruise;
  double s = 0.0;
  double t = 0.0;
  size_t next_region = 0;
  int active_region = -1;
  double shape_t0 = 0.0, shape_T = 0.0, shape_v1 = 0.0, shape_v2 = 0.0;
  bool shape_into_hold = false;

  out.windows.resize(rps.size());
  for (size_t i = 0; i < rps.size(); ++i) {
    out.windows[i].region_index = static_cast<int>(i);
    out.windows[i].kind = rps[i].region.kind;
    out.windows[i].target_speed = rps[i].v2;
    out.windows[i].entry_arc = rps[i].region.entry_arc;
    out.windows[i].exit_arc = rps[i].region.exit_arc;
    out.windows[i].entry_time = -1.0;
    out.windows[i].exit_time = -1.0;
  }

  auto base_speed = [&](double arc) { return plan.segment_speed(plan.segment_at_arc(arc)); };

  // Distance the shaping window covers: T * (v1 + v2) / 2 by the symmetry
  // of the bump weights.
  auto shape_distance = [&](double v1, double v2) {
    return cfg.profile_duration * 0.5 * (v1 + v2);
  };

  std::vector<Waypoint> wps;
  auto emit = [&](double time, double arc) {
    Waypoint w;
    w.time = time;
    w.position = plan.position_at_arc(arc);
    w.orientation = plan.orientation_at_arc(arc);
    w.force = plan.force_at_arc(arc);
    wps.push_back(std::move(w));
  };

  auto begin_shape = [&](double v_from, double v_to, double available, bool into_hold,
                         size_t region_idx) {
    shape_v1 = v_from;
    shape_v2 = v_to;
    const double want = shape_distance(v_from, v_to);
    shape_T = cfg.profile_duration;
    if (into_hold && available < want) {
      // Not enough room to decelerate over the configured window; compress
      // the profile to what fits.
      const double mean_v = 0.5 * (v_from + v_to);
      shape_T = mean_v > 0.0 ? std::max(available, 0.0) / mean_v : 0.0;
      out.windows[region_idx].compressed = true;
    }
    shape_t0 = t;
    shape_into_hold = into_hold;
    phase = shape_T > 0.0 ? Phase::Shape : (into_hold ? Phase::Hold : Phase::Cruise);
    if (phase == Phase::Hold) {
      active_region = static_cast<int>(region_idx);
      out.windows[region_idx].entry_time = t;
    }
  };

  emit(0.0, 0.0);
  double v_prev = base_speed(0.0);

  const long max_ticks = static_cast<long>(5e7);
  long tick = 0;
  while (s < total - 1e-12 && ++tick < max_ticks) {
    double v = 0.0;
    switch (phase) {
      case Phase::Cruise: {
        v = base_speed(s);
        if (next_region < rps.size()) {
          const double entry = rps[next_region].region.entry_arc;
          const double start = entry - shape_distance(v, rps[next_region].v2);
          if (s >= start - 1e-12) {
            begin_shape(v, rps[next_region].v2, entry - s, true, next_region);
            v = (phase == Phase::Shape) ? velocity_profile_tau(shape_v1, shape_v2, 0.0)
                                        : shape_v2;
          }
        }
        break;
      }
      case Phase::Shape: {
        const double tau = (t - shape_t0) / shape_T;
        v = velocity_profile_tau(shape_v1, shape_v2, tau);
        if (tau >= 1.0) {
          if (shape_into_hold) {
            phase = Phase::Hold;
            active_region = static_cast<int>(next_region);
            out.windows[next_region].entry_time = t;
            v = shape_v2;
          } else {
            phase = Phase::Cruise;
            v = base_speed(s);
          }
        }
        break;
      }
      case Phase::Hold: {
        v = rps[active_region].v2;
        if (s >= rps[active_region].region.exit_arc - 1e-12) {
          out.windows[active_region].exit_time = t;
          next_region = static_cast<size_t>(active_region) + 1;
          // Restore unless the next region's shaping would already have
          // started; then shape directly toward its target speed.
          if (next_region < rps.size()) {
            const double entry = rps[next_region].region.entry_arc;
            const double start =
                entry - shape_distance(base_speed(s), rps[next_region].v2);
            if (s >= start - 1e-12) {
              begin_shape(v, rps[next_region].v2, entry - s, true, next_region);
              break;
            }
          }
          active_region = -1;
          begin_shape(v, base_speed(s), std::numeric_limits<double>::infinity(), false, 0);
        }
        break;
      }
    }

    const double ds = dt * 0.5 * (v_prev + v);
    s = std::min(s + ds, total);
    t += dt;
    v_prev = v;
    emit(t, s);
  }
  if (tick >= max_ticks) throw std::runtime_error("retiming failed to reach the plan end");

  // Blend windows: completed by the entry point, sized to the first half of
  // the region at its traversal speed.
  for (size_t i = 0; i < rps.size(); ++i) {
    auto& w = out.windows[i];
    if (w.entry_time < 0.0) w.entry_time = t;  // region at/after the plan end
    if (w.exit_time < 0.0) w.exit_time = t;
    const double half = 0.5 * rps[i].region.length();
    const double T_blend =
        std::max(cfg.min_blend_time, half / std::max(rps[i].v2, 1e-6));
    w.blend_in_start = std::max(0.0, w.entry_time - T_blend);
    w.blend_out_end = w.exit_time + T_blend;
  }

  out.plan = MotionPlan(std::move(wps));
  return out;
}

RetimeResult retime_plan(const MotionPlan& plan, const TransitionRegion& region,
                         double target_speed, const TransitionConfig& cfg, double dt) {
  return retime_plan(plan, std::vector<TransitionRegion>{region},
                     std::vector<double>{target_speed}, cfg, dt);
}

}  // namespace cct
