#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "cct/plan.hpp"

using namespace cct;

namespace {

MotionPlan l_plan() {
  // Down 0.1 m at 0.05 m/s, then right 0.2 m at 0.1 m/s with a press target.
  std::vector<Waypoint> wps(3);
  wps[0].time = 0.0;
  wps[0].position = Vec3(0, 0, 0.1);
  wps[1].time = 2.0;
  wps[1].position = Vec3(0, 0, 0.0);
  wps[1].force = ForceTarget{{false, false, true}, Vec3(0, 0, -5.0)};
  wps[2].time = 4.0;
  wps[2].position = Vec3(0.2, 0, 0.0);
  return MotionPlan(wps);
}

}  // namespace

TEST_CASE("samples interpolate position and expose segment velocity") {
  const MotionPlan plan = l_plan();
  const PlanSample mid = plan.sample(1.0);
  CHECK(mid.position.z() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(mid.velocity.z() == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(mid.speed == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_FALSE(mid.force_axes[2]);

  const PlanSample press = plan.sample(3.0);
  CHECK(press.force_axes[2]);
  CHECK(press.force_target.z() == doctest::Approx(-5.0));
  CHECK(press.velocity.x() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("samples clamp beyond the final waypoint and hold the force target") {
  const MotionPlan plan = l_plan();
  const PlanSample end = plan.sample(99.0);
  CHECK((end.position - Vec3(0.2, 0, 0)).norm() == 0.0);
  CHECK(end.velocity.norm() == 0.0);
  CHECK(end.force_axes[2]);
}

TEST_CASE("arc-length bookkeeping is consistent") {
  const MotionPlan plan = l_plan();
  CHECK(plan.total_arc() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(plan.arc_at_time(2.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(plan.time_at_arc(0.1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((plan.position_at_arc(0.2) - Vec3(0.1, 0, 0)).norm() <= 1e-12);
  CHECK(plan.segment_at_arc(0.05) == 0);
  CHECK(plan.segment_at_arc(0.25) == 1);
  CHECK(plan.segment_speed(0) == doctest::Approx(0.05));
  CHECK(plan.segment_speed(1) == doctest::Approx(0.1));
}

TEST_CASE("closest-point projection finds the right arc") {
  const MotionPlan plan = l_plan();
  const double s = plan.arc_of_closest_point(Vec3(0.15, 0.03, 0.0));
  CHECK(s == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("plan files round-trip") {
  const MotionPlan plan = l_plan();
  const auto path = std::filesystem::temp_directory_path() / "cct_plan_test.json";
  plan.save(path.string());
  const MotionPlan loaded = MotionPlan::load(path.string());
  REQUIRE(loaded.waypoints().size() == plan.waypoints().size());
  for (size_t i = 0; i < plan.waypoints().size(); ++i) {
    CHECK(loaded.waypoints()[i].time == plan.waypoints()[i].time);
    CHECK((loaded.waypoints()[i].position - plan.waypoints()[i].position).norm() == 0.0);
    CHECK(loaded.waypoints()[i].force.has_value() == plan.waypoints()[i].force.has_value());
  }
  std::filesystem::remove(path);
}

TEST_CASE("degenerate plans are rejected") {
  CHECK_THROWS_AS(MotionPlan(std::vector<Waypoint>{Waypoint{}}), std::invalid_argument);
  std::vector<Waypoint> backwards(2);
  backwards[0].time = 1.0;
  backwards[1].time = 0.0;
  CHECK_THROWS_AS(MotionPlan{backwards}, std::invalid_argument);
}
