#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "cct/anticipation.hpp"

using namespace cct;

namespace {

MotionPlan straight_line_plan(double length = 1.0, double speed = 0.05) {
  std::vector<Waypoint> wps(2);
  wps[0].time = 0.0;
  wps[0].position = Vec3::Zero();
  wps[1].time = length / speed;
  wps[1].position = Vec3(length, 0, 0);
  return MotionPlan(wps);
}

}  // namespace

TEST_CASE("prediction without process noise leaves the belief untouched") {
  ContactEstimate e;
  e.mean = Vec3(0.1, 0.2, 0.3);
  e.cov = 0.04 * Mat3::Identity();
  const ContactEstimate out = kf_predict(e, 0.0);
  CHECK((out.mean - e.mean).norm() == 0.0);
  CHECK((out.cov - e.cov).norm() == 0.0);
}

TEST_CASE("process noise widens the trace additively and monotonically") {
  ContactEstimate e;
  e.cov = 0.01 * Mat3::Identity();
  const ContactEstimate once = kf_predict(e, 1e-4);
  CHECK(once.cov.trace() == doctest::Approx(0.03 + 3e-4).epsilon(1e-12));
  ContactEstimate repeat = e;
  double prev_trace = repeat.cov.trace();
  for (int i = 0; i < 5; ++i) {
    repeat = kf_predict(repeat, 1e-4);
    CHECK(repeat.cov.trace() > prev_trace);
    prev_trace = repeat.cov.trace();
  }
}

TEST_CASE("measurement update matches the scalar closed form") {
  // Prior deviation 0.12 with sigma 0.3 per axis, exact measurement noise
  // 0.01^2: the posterior collapses onto the measurement.
  ContactEstimate e;
  e.mean = Vec3(0.12, 0.12, 0.12);
  e.cov = 0.09 * Mat3::Identity();
  const Vec3 z = Vec3::Zero();
  const ContactEstimate post = kf_update(e, z, 1e-4);

  const double k = 0.09 / (0.09 + 1e-4);
  const double expected_mean = 0.12 * (1.0 - k);
  const double joseph_var = (1.0 - k) * (1.0 - k) * 0.09 + k * k * 1e-4;
  for (int i = 0; i < 3; ++i) {
    CHECK(post.mean[i] == doctest::Approx(expected_mean).epsilon(1e-9));
    CHECK(post.cov(i, i) == doctest::Approx(joseph_var).epsilon(1e-9));
  }
  CHECK(std::abs(post.mean.x()) < 0.01);
  CHECK(std::sqrt(post.cov(0, 0)) < 0.05);
  CHECK(post.cov.trace() < e.cov.trace());
}

TEST_CASE("an uninformative measurement leaves the prior in place") {
  ContactEstimate e;
  e.mean = Vec3(0.2, 0, 0);
  e.cov = 0.01 * Mat3::Identity();
  const ContactEstimate post = kf_update(e, Vec3(5, 5, 5), 1e12);
  CHECK((post.mean - e.mean).norm() < 1e-9);
  CHECK(post.cov.trace() == doctest::Approx(e.cov.trace()).epsilon(1e-6));
}

TEST_CASE("a near-dogmatic prior ignores the measurement") {
  ContactEstimate e;
  e.mean = Vec3(0.2, 0, 0);
  e.cov = 1e-12 * Mat3::Identity();
  const ContactEstimate post = kf_update(e, Vec3(1, 1, 1), 0.01);
  CHECK((post.mean - e.mean).norm() < 1e-9);
}

TEST_CASE("non-positive-definite noise is rejected") {
  ContactEstimate e;
  e.cov = 0.01 * Mat3::Identity();
  Mat3 bad = Mat3::Zero();
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(kf_update(e, Vec3::Zero(), bad), std::invalid_argument);
}

TEST_CASE("updates keep the posterior symmetric positive definite and shrink the trace") {
  ContactEstimate e;
  e.mean = Vec3(0.3, -0.1, 0.2);
  e.cov = 0.09 * Mat3::Identity();
  for (int i = 0; i < 6; ++i) {
    const double before = e.cov.trace();
    e = kf_update(e, Vec3(0.01 * i, 0, 0), 1e-4);
    CHECK(e.cov.trace() < before);
    const Eigen::LLT<Mat3> llt(e.cov);
    CHECK(llt.info() == Eigen::Success);
    CHECK((e.cov - e.cov.transpose()).norm() <= 1e-15);
  }
}

TEST_CASE("a spherical belief on a through-line yields a chord of two k sigma") {
  const MotionPlan plan = straight_line_plan();
  ContactEstimate e;
  e.mean = Vec3(0.5, 0, 0);
  e.cov = 0.01 * Mat3::Identity();  // sigma = 0.1
  const auto region = region_of(e, plan, 2.0);
  REQUIRE(region.has_value());
  CHECK(region->length() == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(region->entry_point.x() == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(region->exit_point.x() == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("a tighter belief yields a strictly shorter region") {
  const MotionPlan plan = straight_line_plan();
  ContactEstimate e;
  e.mean = Vec3(0.5, 0, 0);
  e.cov = 0.01 * Mat3::Identity();
  const auto before = region_of(e, plan, 2.0);
  const ContactEstimate post = kf_update(e, Vec3(0.5, 0, 0), 1e-4);
  const auto after = region_of(post, plan, 2.0);
  REQUIRE(before.has_value());
  REQUIRE(after.has_value());
  CHECK(after->length() < before->length());
}

TEST_CASE("a plan that misses the belief produces no region") {
  const MotionPlan plan = straight_line_plan();
  ContactEstimate e;
  e.mean = Vec3(0.5, 1.0, 0);  // 10 sigma off the line
  e.cov = 0.01 * Mat3::Identity();
  CHECK_FALSE(region_of(e, plan, 2.0).has_value());
}

TEST_CASE("zero k sigma degenerates to the single closest point") {
  const MotionPlan plan = straight_line_plan();
  ContactEstimate e;
  e.mean = Vec3(0.5, 0, 0);
  e.cov = 0.01 * Mat3::Identity();
  const auto region = region_of(e, plan, 0.0);
  REQUIRE(region.has_value());
  CHECK(region->length() <= 1e-6);
  CHECK(region->entry_point.x() == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("approach velocity holds at the desired-force fixed point") {
  ImpactModel m;
  m.approach_velocity = 0.07;
  m.learning_rate = 0.002;
  update_approach_velocity(m, 8.0, 8.0, 0.2);
  CHECK(m.approach_velocity == doctest::Approx(0.07).epsilon(1e-15));
}

TEST_CASE("approach velocity follows the learning-rate step") {
  ImpactModel m;
  m.approach_velocity = 0.07;
  m.learning_rate = 0.002;
  update_approach_velocity(m, 8.0, 10.0, 0.2);
  CHECK(m.approach_velocity == doctest::Approx(0.07 - 0.004).epsilon(1e-12));
  REQUIRE(m.samples.size() == 1);
  CHECK(m.samples[0].first == doctest::Approx(0.07));
  CHECK(m.samples[0].second == doctest::Approx(10.0));
}

TEST_CASE("approach velocity clamps into the feasible band") {
  ImpactModel m;
  m.approach_velocity = 0.01;
  m.learning_rate = 1.0;
  update_approach_velocity(m, 0.0, 100.0, 0.2);
  CHECK(m.approach_velocity > 0.0);
  update_approach_velocity(m, 1000.0, 0.0, 0.2);
  CHECK(m.approach_velocity <= 0.2);
}

TEST_CASE("the velocity iteration contracts for rates below the inverse slope") {
  // Linear plant F = a v + b; the fixed-point error shrinks monotonically
  // when beta < 1/a.
  const double a = 100.0, b = 0.5, f_d = 8.0;
  ImpactModel m;
  m.approach_velocity = 0.02;
  m.learning_rate = 0.008;  // < 1/a = 0.01
  double prev_err = std::abs(f_d - (a * m.approach_velocity + b));
  for (int i = 0; i < 10; ++i) {
    const double f_m = a * m.approach_velocity + b;
    update_approach_velocity(m, f_d, f_m, 1.0);
    const double err = std::abs(f_d - (a * m.approach_velocity + b));
    CHECK(err <= prev_err + 1e-12);
    prev_err = err;
  }
  CHECK(prev_err < 0.05);

  const auto fit = m.linear_fit();
  REQUIRE(fit.has_value());
  CHECK(fit->first == doctest::Approx(a).epsilon(1e-6));
  CHECK(fit->second == doctest::Approx(b).epsilon(1e-4));
  CHECK(m.learning_rate <= 1.0 / fit->first);
}
