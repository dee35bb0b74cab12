#include "cct/plan.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cct {

using nlohmann::json;

MotionPlan::MotionPlan(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) throw std::invalid_argument("plan needs at least two waypoints");
  cumulative_arc_.resize(waypoints_.size(), 0.0);
  for (size_t i = 1; i < waypoints_.size(); ++i) {
    if (waypoints_[i].time < waypoints_[i - 1].time)
      throw std::invalid_argument("plan waypoint times must be non-decreasing");
    cumulative_arc_[i] =
        cumulative_arc_[i - 1] + (waypoints_[i].position - waypoints_[i - 1].position).norm();
  }
}

int MotionPlan::segment_at_time(double t) const {
  if (t <= waypoints_.front().time) return 0;
  if (t >= waypoints_.back().time) return static_cast<int>(waypoints_.size()) - 2;
  const auto it = std::upper_bound(
      waypoints_.begin(), waypoints_.end(), t,
      [](double value, const Waypoint& w) { return value < w.time; });
  return static_cast<int>(it - waypoints_.begin()) - 1;
}

PlanSample MotionPlan::sample(double t) const {
  PlanSample out;
  if (waypoints_.empty()) return out;
  const int seg = segment_at_time(t);
  const Waypoint& a = waypoints_[seg];
  const Waypoint& b = waypoints_[seg + 1];
  const double span = b.time - a.time;
  double alpha = span > 0.0 ? (t - a.time) / span : 1.0;
  alpha = clamp01(alpha);

  out.position = a.position + alpha * (b.position - a.position);
  out.orientation = a.orientation + alpha * (b.orientation - a.orientation);
  out.segment = seg;
  if (span > 0.0 && t >= a.time && t <= b.time) {
    out.velocity = (b.position - a.position) / span;
    out.angular_velocity = (b.orientation - a.orientation) / span;
  }
  out.speed = out.velocity.norm();
  if (a.force) {
    out.force_axes = a.force->axes;
    out.force_target = a.force->value;
  }
  // Past the final waypoint the plan holds station under the last segment's
  // force target.
  if (t > waypoints_.back().time && waypoints_[seg].force) {
    out.force_axes = waypoints_[seg].force->axes;
    out.force_target = waypoints_[seg].force->value;
  }
  return out;
}

namespace {

// Index of the segment containing arc length s (binary search over the
// cumulative arc table).
int arc_segment(const std::vector<double>& cumulative, double s) {
  if (s <= 0.0) return 0;
  if (s >= cumulative.back()) return static_cast<int>(cumulative.size()) - 2;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
  int seg = static_cast<int>(it - cumulative.begin()) - 1;
  return std::max(0, std::min(seg, static_cast<int>(cumulative.size()) - 2));
}

}  // namespace

Vec3 MotionPlan::position_at_arc(double s) const {
  if (s <= 0.0) return waypoints_.front().position;
  if (s >= total_arc()) return waypoints_.back().position;
  const int i = arc_segment(cumulative_arc_, s);
  const double seg_len = cumulative_arc_[i + 1] - cumulative_arc_[i];
  const double alpha = seg_len > 0.0 ? (s - cumulative_arc_[i]) / seg_len : 0.0;
  return waypoints_[i].position + alpha * (waypoints_[i + 1].position - waypoints_[i].position);
}

double MotionPlan::orientation_at_arc(double s) const {
  if (s <= 0.0) return waypoints_.front().orientation;
  if (s >= total_arc()) return waypoints_.back().orientation;
  const int i = arc_segment(cumulative_arc_, s);
  const double seg_len = cumulative_arc_[i + 1] - cumulative_arc_[i];
  const double alpha = seg_len > 0.0 ? (s - cumulative_arc_[i]) / seg_len : 0.0;
  return waypoints_[i].orientation +
         alpha * (waypoints_[i + 1].orientation - waypoints_[i].orientation);
}

double MotionPlan::arc_at_time(double t) const {
  if (t <= waypoints_.front().time) return 0.0;
  if (t >= waypoints_.back().time) return total_arc();
  const int seg = segment_at_time(t);
  const Waypoint& a = waypoints_[seg];
  const Waypoint& b = waypoints_[seg + 1];
  const double span = b.time - a.time;
  const double alpha = span > 0.0 ? (t - a.time) / span : 1.0;
  return cumulative_arc_[seg] + alpha * (cumulative_arc_[seg + 1] - cumulative_arc_[seg]);
}

double MotionPlan::time_at_arc(double s) const {
  if (s <= 0.0) return waypoints_.front().time;
  if (s >= total_arc()) return waypoints_.back().time;
  const int i = arc_segment(cumulative_arc_, s);
  const double seg_len = cumulative_arc_[i + 1] - cumulative_arc_[i];
  const double alpha = seg_len > 0.0 ? (s - cumulative_arc_[i]) / seg_len : 0.0;
  return waypoints_[i].time + alpha * (waypoints_[i + 1].time - waypoints_[i].time);
}

double MotionPlan::arc_of_closest_point(const Vec3& p) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (size_t i = 1; i < waypoints_.size(); ++i) {
    const Vec3& a = waypoints_[i - 1].position;
    const Vec3& b = waypoints_[i].position;
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double alpha = len2 > 0.0 ? clamp01(ab.dot(p - a) / len2) : 0.0;
    const Vec3 q = a + alpha * ab;
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = cumulative_arc_[i - 1] + alpha * (cumulative_arc_[i] - cumulative_arc_[i - 1]);
    }
  }
  return best_s;
}

int MotionPlan::segment_at_arc(double s) const { return arc_segment(cumulative_arc_, s); }

double MotionPlan::segment_speed(int segment) const {
  const Waypoint& a = waypoints_.at(segment);
  const Waypoint& b = waypoints_.at(segment + 1);
  const double span = b.time - a.time;
  return span > 0.0 ? (b.position - a.position).norm() / span : 0.0;
}

std::optional<ForceTarget> MotionPlan::force_at_arc(double s) const {
  return waypoints_[segment_at_arc(s)].force;
}

namespace {

json waypoint_to_json(const Waypoint& w) {
  json j;
  j["t"] = w.time;
  j["pos"] = {w.position.x(), w.position.y(), w.position.z()};
  j["orient"] = w.orientation;
  if (w.force) {
    j["force"] = {{"axes", w.force->axes},
                  {"value", {w.force->value.x(), w.force->value.y(), w.force->value.z()}}};
  }
  return j;
}

Waypoint waypoint_from_json(const json& j) {
  Waypoint w;
  w.time = j.at("t").get<double>();
  const auto& p = j.at("pos");
  w.position = Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  w.orientation = j.value("orient", 0.0);
  if (j.contains("force")) {
    ForceTarget f;
    const auto& jf = j.at("force");
    const auto& axes = jf.at("axes");
    for (int i = 0; i < 3; ++i) f.axes[i] = axes.at(i).get<bool>();
    const auto& v = jf.at("value");
    f.value = Vec3(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
    w.force = f;
  }
  return w;
}

}  // namespace

std::string MotionPlan::to_json_string() const {
  json j;
  j["waypoints"] = json::array();
  for (const auto& w : waypoints_) j["waypoints"].push_back(waypoint_to_json(w));
  return j.dump(2);
}

MotionPlan MotionPlan::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  std::vector<Waypoint> wps;
  for (const auto& jw : j.at("waypoints")) wps.push_back(waypoint_from_json(jw));
  return MotionPlan(std::move(wps));
}

MotionPlan MotionPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void MotionPlan::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plan file: " + path);
  out << to_json_string() << "\n";
}

}  // namespace cct
