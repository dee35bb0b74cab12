#include "cct/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cct {

using nlohmann::json;

RowMetrics metrics_from_rows(const std::vector<TickRow>& rows, double dt) {
  RowMetrics m;
  if (rows.empty()) return m;

  double sq_sum = 0.0;
  double kp_sum = 0.0;
  double pred_sq = 0.0;
  long pred_n = 0;
  long transition_ticks = 0;
  for (const auto& r : rows) {
    sq_sum += (r.target_position - r.position).squaredNorm();
    kp_sum += r.kp.mean();
    if (r.pred_err >= 0.0) {
      pred_sq += r.pred_err * r.pred_err;
      ++pred_n;
    }
    if (r.phase == static_cast<int>(TrialPhase::BlendIn) ||
        r.phase == static_cast<int>(TrialPhase::Transition) ||
        r.phase == static_cast<int>(TrialPhase::BlendOut))
      ++transition_ticks;
  }
  m.rms_tracking_error = std::sqrt(sq_sum / static_cast<double>(rows.size()));
  m.mean_kp = kp_sum / static_cast<double>(rows.size());
  if (pred_n > 0) m.prediction_rmse = std::sqrt(pred_sq / static_cast<double>(pred_n));
  m.transition_time = static_cast<double>(transition_ticks) * dt;

  std::vector<Vec3> acc;
  acc.reserve(rows.size());
  for (size_t k = 0; k + 1 < rows.size(); ++k) {
    const Vec3 a = (rows[k + 1].velocity - rows[k].velocity) / dt;
    acc.push_back(a);
    m.max_abs_acceleration = std::max(m.max_abs_acceleration, a.norm());
  }
  for (size_t k = 0; k + 1 < acc.size(); ++k) {
    const Vec3 j = (acc[k + 1] - acc[k]) / dt;
    m.max_abs_jerk = std::max(m.max_abs_jerk, j.norm());
  }
  return m;
}

TrialReport make_report(const TrialResult& result, double dt) {
  TrialReport rep;
  rep.trial = result.trial_index;
  rep.failed = result.failed;
  rep.fail_reason = result.fail_reason;
  rep.ticks = static_cast<long>(result.rows.size());
  rep.duration = static_cast<double>(result.rows.size()) * dt;
  const RowMetrics m = metrics_from_rows(result.rows, dt);
  rep.rms_tracking_error = m.rms_tracking_error;
  rep.max_abs_acceleration = m.max_abs_acceleration;
  rep.max_abs_jerk = m.max_abs_jerk;
  rep.transition_time = m.transition_time;
  rep.mean_kp = m.mean_kp;
  rep.prediction_rmse = m.prediction_rmse;
  rep.mode_count = result.mode_count;
  rep.mode_event_count = static_cast<int>(result.mode_events.size());
  for (const auto& ev : result.mode_events)
    if (ev.new_mode) ++rep.new_mode_events;
  rep.events = result.mode_events;
  rep.windows = result.windows;
  rep.wall_time_ms = result.wall_time_ms;

  for (const auto& info : result.estimates) {
    ContactReportEntry e;
    e.index = info.index;
    e.kind = info.kind == ContactKind::Impact ? "impact" : "impact_less";
    e.prior_mean = info.prior_mean;
    e.prior_trace = info.prior_trace;
    e.posterior_mean = info.posterior_mean;
    e.posterior_trace = info.posterior_trace;
    e.updated = info.updated;
    e.has_region = info.has_region;
    e.region_length = info.region_length;
    e.approach_velocity = info.approach_velocity;
    e.measured_force = info.measured_force;
    e.has_truth = info.has_truth;
    if (info.has_truth) {
      e.true_position = info.true_position;
      e.prior_error = (info.prior_mean - info.true_position).norm();
      e.posterior_error = (info.posterior_mean - info.true_position).norm();
    }
    rep.contacts.push_back(e);
  }
  return rep;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

constexpr const char* kCsvHeader =
    "tick,time,px,py,pz,orient,vx,vy,vz,omega,fx,fy,fz,tau,tpx,tpy,tpz,tspeed,"
    "ux,uy,uz,utau,lambda,eps,prederr,kpx,kpy,kpz,kpa,ffx,ffy,ffz,mode,phase,region";

}  // namespace

void write_csv(const std::string& path, const std::vector<TickRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  std::string buf;
  buf.reserve(rows.size() * 256 + 64);
  buf += kCsvHeader;
  buf += '\n';
  for (const auto& r : rows) {
    buf += std::to_string(r.tick);
    auto add = [&buf](double v) {
      buf += ',';
      append_double(buf, v);
    };
    add(r.time);
    add(r.position.x());
    add(r.position.y());
    add(r.position.z());
    add(r.orientation);
    add(r.velocity.x());
    add(r.velocity.y());
    add(r.velocity.z());
    add(r.angular_velocity);
    add(r.force.x());
    add(r.force.y());
    add(r.force.z());
    add(r.torque);
    add(r.target_position.x());
    add(r.target_position.y());
    add(r.target_position.z());
    add(r.target_speed);
    add(r.command.x());
    add(r.command.y());
    add(r.command.z());
    add(r.command_torque);
    add(r.lambda);
    add(r.eps);
    add(r.pred_err);
    add(r.kp[0]);
    add(r.kp[1]);
    add(r.kp[2]);
    add(r.kp[3]);
    add(r.feedforward.x());
    add(r.feedforward.y());
    add(r.feedforward.z());
    buf += ',';
    buf += std::to_string(r.mode);
    buf += ',';
    buf += std::to_string(r.phase);
    buf += ',';
    buf += std::to_string(r.region);
    buf += '\n';
  }
  out << buf;
}

std::vector<TickRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  if (line != kCsvHeader) throw std::runtime_error("unexpected csv header in " + path);

  std::vector<TickRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    f.reserve(35);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw std::runtime_error("bad csv field in " + path);
      f.push_back(v);
      p = res.ptr;
      if (p < end && *p == ',') ++p;
    }
    if (f.size() != 35) throw std::runtime_error("bad csv row width in " + path);
    TickRow r;
    int i = 0;
    r.tick = static_cast<long>(f[i++]);
    r.time = f[i++];
    r.position = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.orientation = f[i++];
    r.velocity = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.angular_velocity = f[i++];
    r.force = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.torque = f[i++];
    r.target_position = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.target_speed = f[i++];
    r.command = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.command_torque = f[i++];
    r.lambda = f[i++];
    r.eps = f[i++];
    r.pred_err = f[i++];
    r.kp = AxisVec(f[i], f[i + 1], f[i + 2], f[i + 3]);
    i += 4;
    r.feedforward = Vec3(f[i], f[i + 1], f[i + 2]);
    i += 3;
    r.mode = static_cast<int>(f[i++]);
    r.phase = static_cast<int>(f[i++]);
    r.region = static_cast<int>(f[i++]);
    rows.push_back(r);
  }
  return rows;
}

namespace {

json event_to_json(const ModeEvent& ev) {
  return json{{"tick", ev.tick},
              {"trigger", ev.trigger},
              {"winner", ev.winner},
              {"confidence", ev.confidence},
              {"runner_up", ev.runner_up},
              {"runner_up_confidence", ev.runner_up_confidence},
              {"new_mode", ev.new_mode}};
}

ModeEvent event_from_json(const json& j) {
  ModeEvent ev;
  ev.tick = j.at("tick").get<long>();
  ev.trigger = j.at("trigger").get<std::string>();
  ev.winner = j.at("winner").get<int>();
  ev.confidence = j.at("confidence").get<double>();
  ev.runner_up = j.at("runner_up").get<int>();
  ev.runner_up_confidence = j.at("runner_up_confidence").get<double>();
  ev.new_mode = j.at("new_mode").get<bool>();
  return ev;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

json window_to_json(const TransitionWindow& w) {
  return json{{"region_index", w.region_index},
              {"kind", w.kind == ContactKind::Impact ? "impact" : "impact_less"},
              {"blend_in_start", w.blend_in_start},
              {"entry_time", w.entry_time},
              {"exit_time", w.exit_time},
              {"blend_out_end", w.blend_out_end},
              {"target_speed", w.target_speed},
              {"entry_arc", w.entry_arc},
              {"exit_arc", w.exit_arc},
              {"compressed", w.compressed}};
}

TransitionWindow window_from_json(const json& j) {
  TransitionWindow w;
  w.region_index = j.at("region_index").get<int>();
  w.kind = j.at("kind").get<std::string>() == "impact" ? ContactKind::Impact
                                                       : ContactKind::ImpactLess;
  w.blend_in_start = j.at("blend_in_start").get<double>();
  w.entry_time = j.at("entry_time").get<double>();
  w.exit_time = j.at("exit_time").get<double>();
  w.blend_out_end = j.at("blend_out_end").get<double>();
  w.target_speed = j.at("target_speed").get<double>();
  w.entry_arc = j.at("entry_arc").get<double>();
  w.exit_arc = j.at("exit_arc").get<double>();
  w.compressed = j.at("compressed").get<bool>();
  return w;
}

json contact_to_json(const ContactReportEntry& e) {
  json j{{"index", e.index},
         {"kind", e.kind},
         {"prior_mean", vec3_json(e.prior_mean)},
         {"prior_trace", e.prior_trace},
         {"posterior_mean", vec3_json(e.posterior_mean)},
         {"posterior_trace", e.posterior_trace},
         {"updated", e.updated},
         {"has_region", e.has_region},
         {"region_length", e.region_length},
         {"approach_velocity", e.approach_velocity},
         {"measured_force", e.measured_force}};
  // Oracle-assisted fields: derived from the simulator's noiseless contact
  // position, never from the measured stream.
  j["oracle"] = json{{"has_truth", e.has_truth},
                     {"true_position", vec3_json(e.true_position)},
                     {"prior_error", e.prior_error},
                     {"posterior_error", e.posterior_error}};
  return j;
}

ContactReportEntry contact_from_json(const json& j) {
  ContactReportEntry e;
  e.index = j.at("index").get<int>();
  e.kind = j.at("kind").get<std::string>();
  e.prior_mean = vec3_from(j.at("prior_mean"));
  e.prior_trace = j.at("prior_trace").get<double>();
  e.posterior_mean = vec3_from(j.at("posterior_mean"));
  e.posterior_trace = j.at("posterior_trace").get<double>();
  e.updated = j.at("updated").get<bool>();
  e.has_region = j.at("has_region").get<bool>();
  e.region_length = j.at("region_length").get<double>();
  e.approach_velocity = j.at("approach_velocity").get<double>();
  e.measured_force = j.at("measured_force").get<double>();
  const auto& o = j.at("oracle");
  e.has_truth = o.at("has_truth").get<bool>();
  e.true_position = vec3_from(o.at("true_position"));
  e.prior_error = o.at("prior_error").get<double>();
  e.posterior_error = o.at("posterior_error").get<double>();
  return e;
}

json report_to_json(const TrialReport& r) {
  json j{{"trial", r.trial},
         {"failed", r.failed},
         {"fail_reason", r.fail_reason},
         {"ticks", r.ticks},
         {"duration", r.duration},
         {"rms_tracking_error", r.rms_tracking_error},
         {"max_abs_acceleration", r.max_abs_acceleration},
         {"max_abs_jerk", r.max_abs_jerk},
         {"transition_time", r.transition_time},
         {"mean_kp", r.mean_kp},
         {"prediction_rmse", r.prediction_rmse},
         {"mode_count", r.mode_count},
         {"mode_event_count", r.mode_event_count},
         {"new_mode_events", r.new_mode_events},
         {"wall_time_ms", r.wall_time_ms}};
  j["contacts"] = json::array();
  for (const auto& c : r.contacts) j["contacts"].push_back(contact_to_json(c));
  j["events"] = json::array();
  for (const auto& ev : r.events) j["events"].push_back(event_to_json(ev));
  j["windows"] = json::array();
  for (const auto& w : r.windows) j["windows"].push_back(window_to_json(w));
  return j;
}

TrialReport report_from_json(const json& j) {
  TrialReport r;
  r.trial = j.at("trial").get<int>();
  r.failed = j.at("failed").get<bool>();
  r.fail_reason = j.at("fail_reason").get<std::string>();
  r.ticks = j.at("ticks").get<long>();
  r.duration = j.at("duration").get<double>();
  r.rms_tracking_error = j.at("rms_tracking_error").get<double>();
  r.max_abs_acceleration = j.at("max_abs_acceleration").get<double>();
  r.max_abs_jerk = j.at("max_abs_jerk").get<double>();
  r.transition_time = j.at("transition_time").get<double>();
  r.mean_kp = j.at("mean_kp").get<double>();
  r.prediction_rmse = j.at("prediction_rmse").get<double>();
  r.mode_count = j.at("mode_count").get<int>();
  r.mode_event_count = j.at("mode_event_count").get<int>();
  r.new_mode_events = j.at("new_mode_events").get<int>();
  r.wall_time_ms = j.at("wall_time_ms").get<double>();
  for (const auto& jc : j.at("contacts")) r.contacts.push_back(contact_from_json(jc));
  for (const auto& je : j.at("events")) r.events.push_back(event_from_json(je));
  for (const auto& jw : j.at("windows")) r.windows.push_back(window_from_json(jw));
  return r;
}

}  // namespace

void write_events_jsonl(const std::string& path, const std::vector<ModeEvent>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write events: " + path);
  for (const auto& ev : events) out << event_to_json(ev).dump() << "\n";
}

std::string summary_to_json(const RunSummary& summary) {
  json j{{"scenario_name", summary.scenario_name},
         {"seed", summary.seed},
         {"controller", summary.controller},
         {"model_policy", summary.model_policy}};
  j["trials"] = json::array();
  for (const auto& t : summary.trials) j["trials"].push_back(report_to_json(t));
  return j.dump(2);
}

RunSummary summary_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunSummary s;
  s.scenario_name = j.at("scenario_name").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.controller = j.at("controller").get<std::string>();
  s.model_policy = j.at("model_policy").get<std::string>();
  for (const auto& jt : j.at("trials")) s.trials.push_back(report_from_json(jt));
  return s;
}

double metric_value(const TrialReport& r, const std::string& metric) {
  if (metric == "rms_tracking_error") return r.rms_tracking_error;
  if (metric == "max_abs_acceleration") return r.max_abs_acceleration;
  if (metric == "max_abs_jerk") return r.max_abs_jerk;
  if (metric == "transition_time") return r.transition_time;
  if (metric == "mean_kp") return r.mean_kp;
  if (metric == "prediction_rmse") return r.prediction_rmse;
  if (metric == "mode_count") return static_cast<double>(r.mode_count);
  if (metric == "duration") return r.duration;
  if (metric == "peak_impact_force") {
    double peak = -1.0;
    for (const auto& c : r.contacts) peak = std::max(peak, c.measured_force);
    return peak;
  }
  if (metric == "estimate_error") {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : r.contacts)
      if (c.has_truth && c.posterior_error >= 0.0) {
        sum += c.posterior_error;
        ++n;
      }
    return n > 0 ? sum / n : -1.0;
  }
  throw std::invalid_argument("unknown metric: " + metric);
}

ComparisonTable compare_runs(const RunSummary& a, const RunSummary& b,
                             const std::string& metric) {
  ComparisonTable table;
  table.metric = metric;
  const size_t n = std::min(a.trials.size(), b.trials.size());
  table.truncated = a.trials.size() != b.trials.size();
  double sa = 0.0, sb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ComparisonRow row;
    row.trial = a.trials[i].trial;
    row.a = metric_value(a.trials[i], metric);
    row.b = metric_value(b.trials[i], metric);
    row.delta = row.b - row.a;
    sa += row.a;
    sb += row.b;
    table.rows.push_back(row);
  }
  if (n > 0) {
    table.mean_a = sa / static_cast<double>(n);
    table.mean_b = sb / static_cast<double>(n);
    table.mean_delta = table.mean_b - table.mean_a;
  }
  return table;
}

std::string comparison_to_json(const ComparisonTable& table) {
  json j{{"metric", table.metric},
         {"mean_a", table.mean_a},
         {"mean_b", table.mean_b},
         {"mean_delta", table.mean_delta},
         {"truncated", table.truncated}};
  j["rows"] = json::array();
  for (const auto& r : table.rows)
    j["rows"].push_back(json{{"trial", r.trial}, {"a", r.a}, {"b", r.b}, {"delta", r.delta}});
  return j.dump(2);
}

std::string comparison_to_text(const ComparisonTable& table) {
  std::ostringstream out;
  out << "metric: " << table.metric << "\n";
  if (table.truncated) out << "warning: trial counts differ; comparing common prefix\n";
  out << "trial\ta\tb\tdelta\n";
  for (const auto& r : table.rows)
    out << r.trial << "\t" << r.a << "\t" << r.b << "\t" << r.delta << "\n";
  out << "mean\t" << table.mean_a << "\t" << table.mean_b << "\t" << table.mean_delta << "\n";
  return out.str();
}

}  // namespace cct
