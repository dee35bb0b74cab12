#include <doctest.h>

#include <cmath>

#include "cct/controller.hpp"
#include "cct/sim.hpp"

using namespace cct;

namespace {

GainConfig test_gains() {
  GainConfig g;
  g.kp_free = AxisVec(50, 50, 50, 5);
  g.kp_max = AxisVec(1000, 1000, 1000, 100);
  g.logistic_rate = 20.0;
  g.logistic_midpoint = 0.5;
  return g;
}

}  // namespace

TEST_CASE("activation sits at one half exactly at the midpoint error") {
  const GainConfig g = test_gains();
  CHECK(lambda_of_error(g.logistic_midpoint, g) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("activation saturates exactly at the extremes") {
  GainConfig g = test_gains();
  g.logistic_rate = 2000.0;  // rate * midpoint overflows the exponential
  CHECK(lambda_of_error(0.0, g) == 1.0);
  CHECK(lambda_of_error(1e9, g) == 0.0);
}

TEST_CASE("activation decreases strictly with the prediction error") {
  const GainConfig g = test_gains();
  double prev = 2.0;
  for (double eps = 0.0; eps <= 2.0; eps += 0.01) {
    const double lam = lambda_of_error(eps, g);
    CHECK(lam < prev);
    CHECK(lam >= 0.0);
    CHECK(lam <= 1.0);
    prev = lam;
  }
}

TEST_CASE("stiffness interpolates between the bounds") {
  const GainConfig g = test_gains();
  CHECK((stiffness_of(1.0, g) - g.kp_free).norm() == 0.0);
  CHECK((stiffness_of(0.0, g) - g.kp_max).norm() == 0.0);
  const AxisVec mid = stiffness_of(0.5, g);
  for (int i = 0; i < 4; ++i)
    CHECK(mid[i] == doctest::Approx(0.5 * (g.kp_free[i] + g.kp_max[i])).epsilon(1e-15));
}

TEST_CASE("damping follows the quarter-stiffness square root") {
  const GainConfig g = test_gains();
  const AxisVec kd = damping_of(AxisVec(100, 100, 100, 100), g);
  for (int i = 0; i < 4; ++i) CHECK(kd[i] == doctest::Approx(5.0).epsilon(1e-15));

  GainConfig conventional = g;
  conventional.conventional_damping = true;
  const AxisVec kd2 = damping_of(AxisVec(100, 100, 100, 100), conventional);
  for (int i = 0; i < 4; ++i) CHECK(kd2[i] == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("zero errors with no targets produce zero command") {
  const GainConfig g = test_gains();
  RobotState s;
  PlanSample target;
  Vec3 integral = Vec3::Zero();
  const Wrench u = control(s, target, Wrench{}, 0.0, g.kp_free, damping_of(g.kp_free, g),
                           Vec3::Zero(), 0.001, g, integral);
  CHECK(u.force.norm() == 0.0);
  CHECK(u.torque == 0.0);
}

TEST_CASE("zero activation removes the feed-forward term entirely") {
  const GainConfig g = test_gains();
  RobotState s;
  s.position = Vec3(0.01, 0, 0);
  PlanSample target;
  Wrench w_pred;
  w_pred.force = Vec3(5, 5, 5);
  Vec3 integral = Vec3::Zero();
  const Wrench with_ff = control(s, target, w_pred, 0.0, g.kp_free,
                                 damping_of(g.kp_free, g), Vec3::Zero(), 0.001, g, integral);
  Vec3 integral2 = Vec3::Zero();
  const Wrench without = control(s, target, Wrench{}, 0.0, g.kp_free,
                                 damping_of(g.kp_free, g), Vec3::Zero(), 0.001, g, integral2);
  CHECK((with_ff.force - without.force).norm() == 0.0);
}

TEST_CASE("fixed-gain baseline equals the adaptive law at zero activation") {
  const GainConfig g = test_gains();
  RobotState s;
  s.position = Vec3(0.02, -0.01, 0.005);
  s.linear_velocity = Vec3(0.01, 0.03, 0);
  PlanSample target;
  target.position = Vec3(0.05, 0, 0);
  target.velocity = Vec3(0.05, 0, 0);
  Vec3 ia = Vec3::Zero(), ib = Vec3::Zero();
  const Wrench a = fixed_gain_control(s, target, g.kp_max, Vec3::Zero(), 0.001, g, ia);
  const Wrench b = control(s, target, Wrench{}, 0.0, g.kp_max, damping_of(g.kp_max, g),
                           Vec3::Zero(), 0.001, g, ib);
  CHECK((a.force - b.force).norm() == 0.0);
  CHECK(a.torque == b.torque);
}

TEST_CASE("force-controlled axes receive no motion feedback") {
  const GainConfig g = test_gains();
  RobotState s;
  s.position = Vec3(0.1, 0.1, 0.1);  // large position error everywhere
  s.measured_wrench.force = Vec3(0, 0, -3.0);
  PlanSample target;
  target.position = Vec3::Zero();
  target.force_axes = {false, false, true};
  target.force_target = Vec3(0, 0, -5.0);
  const Wrench mf = motion_feedback(s, target, g.kp_max, damping_of(g.kp_max, g));
  CHECK(mf.force.z() == 0.0);
  CHECK(mf.force.x() != 0.0);

  Vec3 integral = Vec3::Zero();
  const Vec3 fc = force_control_term(s, target, 0.001, g, integral);
  CHECK(fc.z() < 0.0);  // pressing harder toward the setpoint
  CHECK(fc.x() == 0.0);
  CHECK(integral.z() != 0.0);
  CHECK(integral.x() == 0.0);
}

TEST_CASE("force integral saturates at the anti-windup clamp") {
  GainConfig g = test_gains();
  g.force_integral_limit = 0.5;
  RobotState s;
  PlanSample target;
  target.force_axes = {true, false, false};
  target.force_target = Vec3(100.0, 0, 0);
  Vec3 integral = Vec3::Zero();
  for (int i = 0; i < 1000; ++i) force_control_term(s, target, 0.01, g, integral);
  CHECK(integral.x() == doctest::Approx(0.5));
}

TEST_CASE("non-finite inputs raise a controller fault") {
  const GainConfig g = test_gains();
  RobotState s;
  s.position = Vec3(std::nan(""), 0, 0);
  PlanSample target;
  Vec3 integral = Vec3::Zero();
  CHECK_THROWS_AS(control(s, target, Wrench{}, 0.0, g.kp_free, damping_of(g.kp_free, g),
                          Vec3::Zero(), 0.001, g, integral),
                  ControllerFault);
}

TEST_CASE("accurate feed-forward beats pure low-gain feedback on a constant disturbance") {
  // Two runs against the plant: one trusting a perfect compensation wrench,
  // one with bare kp_free feedback.
  GainConfig g = test_gains();
  EnvironmentSpec env;
  SimConfig cfg;
  cfg.timestep = 0.001;
  cfg.trial_steps = 4000;
  Wrench disturbance;
  disturbance.force = Vec3(-2.0, 0, 0);
  PlanSample target;

  auto run = [&](double lambda, const Wrench& w_pred) {
    Simulator sim(env, cfg, RobotState{});
    Vec3 integral = Vec3::Zero();
    for (int i = 0; i < 4000; ++i) {
      const Wrench u = control(sim.state(), target, w_pred, lambda, g.kp_free,
                               damping_of(g.kp_free, g), Vec3::Zero(), cfg.timestep, g,
                               integral);
      sim.step(u + disturbance);
    }
    return sim.state().position.norm();
  };

  Wrench compensation;
  compensation.force = Vec3(2.0, 0, 0);  // exactly cancels the disturbance
  const double with_ff = run(1.0, compensation);
  const double without_ff = run(0.0, Wrench{});
  CHECK(with_ff < without_ff);
  CHECK(with_ff < 1e-6);
  CHECK(without_ff == doctest::Approx(2.0 / 50.0).epsilon(0.01));
}
