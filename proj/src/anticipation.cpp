#include "cct/anticipation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace cct {

std::optional<std::pair<double, double>> ImpactModel::linear_fit() const {
  if (samples.size() < 2) return std::nullopt;
  double min_v = samples.front().first, max_v = samples.front().first;
  for (const auto& s : samples) {
    min_v = std::min(min_v, s.first);
    max_v = std::max(max_v, s.first);
  }
  if (max_v - min_v < 1e-9) return std::nullopt;

  const double n = static_cast<double>(samples.size());
  double sv = 0.0, sf = 0.0, svv = 0.0, svf = 0.0;
  for (const auto& s : samples) {
    sv += s.first;
    sf += s.second;
    svv += s.first * s.first;
    svf += s.first * s.second;
  }
  const double slope = (n * svf - sv * sf) / (n * svv - sv * sv);
  const double intercept = (sf - slope * sv) / n;
  return std::make_pair(slope, intercept);
}

ContactEstimate kf_predict(const ContactEstimate& estimate, const Mat3& process_noise) {
  ContactEstimate out = estimate;
  out.cov += process_noise;
  return out;
}

ContactEstimate kf_predict(const ContactEstimate& estimate, double process_noise_var) {
  return kf_predict(estimate, Mat3(process_noise_var * Mat3::Identity()));
}

ContactEstimate kf_update(const ContactEstimate& estimate, const Vec3& measured_position,
                          const Mat3& measurement_noise) {
  const Eigen::LLT<Mat3> llt_r(measurement_noise);
  if (llt_r.info() != Eigen::Success)
    throw std::invalid_argument("measurement noise must be symmetric positive-definite");
  const Eigen::LLT<Mat3> llt_p(estimate.cov);
  if (llt_p.info() != Eigen::Success)
    throw std::invalid_argument("estimate covariance must be symmetric positive-definite");

  const Mat3 innovation_cov = estimate.cov + measurement_noise;
  const Mat3 gain = estimate.cov * innovation_cov.inverse();

  ContactEstimate out = estimate;
  out.mean = estimate.mean + gain * (measured_position - estimate.mean);
  const Mat3 imk = Mat3::Identity() - gain;
  out.cov = imk * estimate.cov * imk.transpose() + gain * measurement_noise * gain.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

ContactEstimate kf_update(const ContactEstimate& estimate, const Vec3& measured_position,
                          double measurement_noise_var) {
  return kf_update(estimate, measured_position, Mat3(measurement_noise_var * Mat3::Identity()));
}

namespace {

double mahalanobis_sq(const Vec3& p, const ContactEstimate& e, const Eigen::LLT<Mat3>& llt) {
  return llt.matrixL().solve(p - e.mean).squaredNorm();
}

}  // namespace

std::optional<TransitionRegion> region_of(const ContactEstimate& estimate,
                                          const MotionPlan& plan, double k_sigma) {
  if (plan.empty() || plan.total_arc() <= 0.0) return std::nullopt;
  const Eigen::LLT<Mat3> llt(estimate.cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("estimate covariance must be symmetric positive-definite");

  const double total = plan.total_arc();
  const double step = std::max(total / 4096.0, 1e-6);
  const double limit = k_sigma * k_sigma;

  // Degenerate cut: report the closest approach as a single-point region
  // when it touches the ellipsoid boundary.
  auto maha_at = [&](double s) { return mahalanobis_sq(plan.position_at_arc(s), estimate, llt); };

  double first_in = -1.0, last_in = -1.0;
  for (double s = 0.0; s <= total + 0.5 * step; s += step) {
    const double arc = std::min(s, total);
    if (maha_at(arc) <= limit + 1e-12) {
      if (first_in < 0.0) first_in = arc;
      last_in = arc;
    } else if (first_in >= 0.0) {
      break;  // first contiguous run only
    }
  }
  if (first_in < 0.0) {
    if (k_sigma > 0.0) return std::nullopt;
    // k = 0: accept an exact pass through the mean.
    double best_s = 0.0, best_m = std::numeric_limits<double>::infinity();
    for (double s = 0.0; s <= total + 0.5 * step; s += step) {
      const double arc = std::min(s, total);
      const double m = maha_at(arc);
      if (m < best_m) {
        best_m = m;
        best_s = arc;
      }
    }
    if (best_m > 1e-9) return std::nullopt;
    TransitionRegion region;
    region.entry_arc = region.exit_arc = best_s;
    region.entry_point = region.exit_point = plan.position_at_arc(best_s);
    region.kind = estimate.kind;
    return region;
  }

  // Refine both boundaries by bisection against the ellipsoid surface.
  auto refine = [&](double outside, double inside) {
    for (int i = 0; i < 64; ++i) {
      const double mid = 0.5 * (outside + inside);
      if (maha_at(mid) <= limit)
        inside = mid;
      else
        outside = mid;
    }
    return inside;
  };
  double entry = first_in;
  if (first_in > 0.0) entry = refine(std::max(0.0, first_in - step), first_in);
  double exit = last_in;
  if (last_in < total) exit = refine(std::min(total, last_in + step), last_in);

  TransitionRegion region;
  region.entry_arc = entry;
  region.exit_arc = exit;
  region.entry_point = plan.position_at_arc(entry);
  region.exit_point = plan.position_at_arc(exit);
  region.kind = estimate.kind;
  return region;
}

void update_approach_velocity(ImpactModel& model, double desired_force, double measured_force,
                              double max_velocity) {
  model.samples.emplace_back(model.approach_velocity, measured_force);
  double v = model.approach_velocity + model.learning_rate * (desired_force - measured_force);
  const double floor = 1e-3;
  v = std::clamp(v, floor, std::max(floor, max_velocity));
  model.approach_velocity = v;
}

}  // namespace cct
