#include <doctest.h>

#include <cmath>

#include "cct/transition.hpp"

using namespace cct;

namespace {

// Frozen reference series for a 1.2 -> 0.5 swing over unit time, computed
// independently at 60-digit precision.
constexpr double kGoldenTau[] = {0.0,  0.05, 0.1,  0.15, 0.2,  0.25, 0.3,
                                 0.35, 0.4,  0.45, 0.5,  0.55, 0.6,  0.65,
                                 0.7,  0.75, 0.8,  0.85, 0.9,  0.95, 1.0};
constexpr double kGoldenV[] = {1.2,
                               1.199999995866095,
                               1.1999034743455885,
                               1.1971229492779858,
                               1.183915841062982,
                               1.1545215816099352,
                               1.1093006714202058,
                               1.0522735600559034,
                               0.9879414987757851,
                               0.9197606156519224,
                               0.85,
                               0.7802393843480777,
                               0.7120585012242149,
                               0.6477264399440965,
                               0.5906993285797941,
                               0.5454784183900648,
                               0.516084158937018,
                               0.5028770507220142,
                               0.5000965256544114,
                               0.5000000041339049,
                               0.5};

GainConfig test_gains() {
  GainConfig g;
  g.kp_free = AxisVec(50, 50, 50, 5);
  g.kp_max = AxisVec(1000, 1000, 1000, 100);
  return g;
}

MotionPlan straight_plan(double length, double speed) {
  std::vector<Waypoint> wps(2);
  wps[0].time = 0.0;
  wps[0].position = Vec3::Zero();
  wps[1].time = length / speed;
  wps[1].position = Vec3(length, 0, 0);
  return MotionPlan(wps);
}

TransitionRegion region_on_line(double entry, double exit) {
  TransitionRegion r;
  r.entry_arc = entry;
  r.exit_arc = exit;
  r.entry_point = Vec3(entry, 0, 0);
  r.exit_point = Vec3(exit, 0, 0);
  r.kind = ContactKind::Impact;
  return r;
}

}  // namespace

TEST_CASE("impact-less transitions use maximal stiffness at unchanged speed") {
  const GainConfig g = test_gains();
  const TransitionGains tg = transition_gains(ContactKind::ImpactLess, g, {}, nullptr);
  CHECK((tg.kp - g.kp_max).norm() == 0.0);
  CHECK_FALSE(tg.approach_velocity.has_value());
}

TEST_CASE("impact transitions relax stiffness and adopt the learned approach speed") {
  const GainConfig g = test_gains();
  TransitionConfig cfg;
  cfg.kp_low_scale = 0.5;
  ImpactModel impact;
  impact.approach_velocity = 0.033;
  const TransitionGains tg = transition_gains(ContactKind::Impact, g, cfg, &impact);
  CHECK((tg.kp - 0.5 * g.kp_free).norm() == 0.0);
  REQUIRE(tg.approach_velocity.has_value());
  CHECK(*tg.approach_velocity == doctest::Approx(0.033));

  TransitionConfig identity;
  identity.kp_low_scale = 1.0;
  const TransitionGains same = transition_gains(ContactKind::Impact, g, identity, &impact);
  CHECK((same.kp - g.kp_free).norm() == 0.0);
}

TEST_CASE("controller interpolation hits both endpoints and the midpoint") {
  Wrench u1, u2;
  u1.force = Vec3(1, 0, 0);
  u1.torque = 0.5;
  u2.force = Vec3(0, 2, 0);
  u2.torque = -0.5;
  CHECK((blend(u1, u2, 0.0, 2.0).force - u1.force).norm() == 0.0);
  CHECK((blend(u1, u2, 2.0, 2.0).force - u2.force).norm() == 0.0);
  CHECK((blend(u1, u2, 5.0, 2.0).force - u2.force).norm() == 0.0);
  const Wrench mid = blend(u1, u2, 1.0, 2.0);
  CHECK((mid.force - Vec3(0.5, 1.0, 0)).norm() <= 1e-15);
  CHECK(mid.torque == doctest::Approx(0.0));
}

TEST_CASE("speed profile midpoint is the exact average") {
  CHECK(velocity_profile_tau(1.2, 0.5, 0.5) == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(velocity_profile_tau(0.0, 1.0, 0.5) == 0.5);
}

TEST_CASE("speed profile clamps outside the window") {
  CHECK(velocity_profile_tau(1.2, 0.5, -0.1) == 1.2);
  CHECK(velocity_profile_tau(1.2, 0.5, 1.3) == 0.5);
  VelocityProfileParams p{1.2, 0.5, 2.0, 3.0};
  CHECK(velocity_profile(p, 1.9) == 1.2);
  CHECK(velocity_profile(p, 3.5) == 0.5);
  CHECK(velocity_profile(p, 2.5) == doctest::Approx(0.85).epsilon(1e-15));
}

TEST_CASE("speed profile reproduces the frozen reference series") {
  for (size_t i = 0; i < std::size(kGoldenTau); ++i)
    CHECK(velocity_profile_tau(1.2, 0.5, kGoldenTau[i]) ==
          doctest::Approx(kGoldenV[i]).epsilon(1e-12));
}

TEST_CASE("speed profile is monotone and bounded between its endpoints") {
  double prev = 1.2;
  for (double tau = 0.0; tau <= 1.0; tau += 1e-3) {
    const double v = velocity_profile_tau(1.2, 0.5, tau);
    CHECK(v <= prev + 1e-15);
    CHECK(v <= 1.2);
    CHECK(v >= 0.5);
    prev = v;
  }
}

TEST_CASE("finite differences of the profile vanish to third order at the boundaries") {
  const double h = 0.01;
  auto v = [](double tau) { return velocity_profile_tau(1.2, 0.5, tau); };
  for (double edge : {0.0, 1.0}) {
    const double sign = edge == 0.0 ? 1.0 : -1.0;
    const double v0 = v(edge);
    const double v1 = v(edge + sign * h);
    const double v2 = v(edge + sign * 2 * h);
    const double v3 = v(edge + sign * 3 * h);
    CHECK(std::abs(v1 - v0) / h <= 1e-6);                       // first derivative
    CHECK(std::abs(v2 - 2 * v1 + v0) / (h * h) <= 1e-6);        // second
    CHECK(std::abs(v3 - 3 * v2 + 3 * v1 - v0) / (h * h * h) <= 1e-6);  // third
  }
  // Continuity at the boundaries.
  CHECK(std::abs(v(1e-12) - 1.2) <= 1e-12);
  CHECK(std::abs(v(1.0 - 1e-12) - 0.5) <= 1e-12);
}

TEST_CASE("retiming with the plan speed as target leaves the timeline unchanged") {
  const MotionPlan plan = straight_plan(0.5, 0.05);
  TransitionConfig cfg;
  cfg.profile_duration = 1.0;
  const RetimeResult rr = retime_plan(plan, region_on_line(0.3, 0.34), 0.05, cfg, 0.002);
  for (double t = 0.0; t <= plan.duration(); t += 0.25) {
    const Vec3 a = plan.sample(t).position;
    const Vec3 b = rr.plan.sample(t).position;
    CHECK((a - b).norm() <= 1e-9);
  }
}

TEST_CASE("retimed arrival at the region boundary is delayed by the profile deficit") {
  // v1 = 0.05, v2 = 0.02, entry 0.1 m ahead: the shaping window loses
  // distance T (v1 - v2)/2 against cruise, so arrival shifts by that loss
  // over v1. A quadrature sweep of the profile confirms the closed form.
  const double v1 = 0.05, v2 = 0.02, T = 1.0, entry = 0.1;
  const MotionPlan plan = straight_plan(0.3, v1);
  TransitionConfig cfg;
  cfg.profile_duration = T;
  const RetimeResult rr = retime_plan(plan, region_on_line(entry, 0.12), v2, cfg, 0.001);

  // Quadrature of the profile distance.
  double distance = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double tau0 = static_cast<double>(i) / n;
    const double tau1 = static_cast<double>(i + 1) / n;
    distance += 0.5 *
                (velocity_profile_tau(v1, v2, tau0) + velocity_profile_tau(v1, v2, tau1)) *
                (T / n);
  }
  CHECK(distance == doctest::Approx(T * (v1 + v2) / 2).epsilon(1e-6));

  const double original_arrival = entry / v1;
  const double expected_delay = T - distance / v1;
  REQUIRE(rr.windows.size() == 1);
  CHECK(rr.windows[0].entry_time ==
        doctest::Approx(original_arrival + expected_delay).epsilon(2e-2));
  CHECK(rr.windows[0].entry_time > original_arrival);
}

TEST_CASE("retiming reaches the boundary at the target speed") {
  const MotionPlan plan = straight_plan(0.5, 0.08);
  TransitionConfig cfg;
  cfg.profile_duration = 1.0;
  const RetimeResult rr = retime_plan(plan, region_on_line(0.3, 0.36), 0.03, cfg, 0.001);
  REQUIRE(rr.windows.size() == 1);
  const double t_entry = rr.windows[0].entry_time;
  const PlanSample s = rr.plan.sample(t_entry + 0.01);
  CHECK(s.speed == doctest::Approx(0.03).epsilon(0.02));
  // Speed is restored after the exit.
  const double t_exit = rr.windows[0].exit_time;
  const PlanSample after = rr.plan.sample(t_exit + cfg.profile_duration + 0.2);
  CHECK(after.speed == doctest::Approx(0.08).epsilon(0.02));
}

TEST_CASE("retimed positions stay on the original path") {
  const MotionPlan plan = [&] {
    std::vector<Waypoint> wps(3);
    wps[0].time = 0.0;
    wps[0].position = Vec3(0, 0, 0.1);
    wps[1].time = 2.0;
    wps[1].position = Vec3(0, 0, 0);
    wps[2].time = 6.0;
    wps[2].position = Vec3(0.4, 0, 0);
    return MotionPlan(wps);
  }();
  TransitionConfig cfg;
  const RetimeResult rr = retime_plan(plan, region_on_line(0.05, 0.15), 0.02, cfg, 0.002);
  for (const auto& w : rr.plan.waypoints()) {
    const double s = plan.arc_of_closest_point(w.position);
    CHECK((plan.position_at_arc(s) - w.position).norm() <= 1e-6);
  }
}

TEST_CASE("a region hugging the plan start compresses the shaping window") {
  const MotionPlan plan = straight_plan(0.4, 0.05);
  TransitionConfig cfg;
  cfg.profile_duration = 4.0;  // wants 0.14 m of shaping room
  const RetimeResult rr = retime_plan(plan, region_on_line(0.02, 0.08), 0.02, cfg, 0.001);
  REQUIRE(rr.windows.size() == 1);
  CHECK(rr.windows[0].compressed);
}

TEST_CASE("overlapping regions chain without restoring speed in between") {
  const MotionPlan plan = straight_plan(1.0, 0.1);
  std::vector<TransitionRegion> regions{region_on_line(0.3, 0.5), region_on_line(0.45, 0.7)};
  std::vector<double> speeds{0.04, 0.02};
  TransitionConfig cfg;
  cfg.profile_duration = 0.5;
  const RetimeResult rr = retime_plan(plan, regions, speeds, cfg, 0.001);
  REQUIRE(rr.windows.size() == 2);
  CHECK(rr.windows[0].entry_time < rr.windows[1].entry_time);
  // Inside the second region the speed target is the second target.
  const PlanSample s = rr.plan.sample(rr.windows[1].entry_time + 0.2);
  CHECK(s.speed == doctest::Approx(0.02).epsilon(0.05));
}

TEST_CASE("blend windows close exactly at the region boundary point") {
  const MotionPlan plan = straight_plan(0.5, 0.08);
  TransitionConfig cfg;
  const RetimeResult rr = retime_plan(plan, region_on_line(0.3, 0.36), 0.03, cfg, 0.001);
  REQUIRE(rr.windows.size() == 1);
  CHECK(rr.windows[0].blend_in_start < rr.windows[0].entry_time);
  CHECK(rr.windows[0].blend_out_end > rr.windows[0].exit_time);
  const double t_blend = rr.windows[0].entry_time - rr.windows[0].blend_in_start;
  const double expected = 0.5 * 0.06 / 0.03;  // half region at the target speed
  CHECK(t_blend == doctest::Approx(expected).epsilon(1e-6));
}
