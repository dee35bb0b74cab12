#pragma once

#include <string>
#include <vector>

#include "cct/scenario.hpp"
#include "cct/trial.hpp"

namespace cct {

/// Contact bookkeeping in a trial report. The truth/error fields are
/// oracle-assisted (they read the simulator's noiseless contact position)
/// and are the only metrics allowed to do so.
struct ContactReportEntry {
  int index = -1;
  std::string kind;
  Vec3 prior_mean = Vec3::Zero();
  double prior_trace = 0.0;
  Vec3 posterior_mean = Vec3::Zero();
  double posterior_trace = 0.0;
  bool updated = false;
  bool has_region = false;
  double region_length = 0.0;
  double approach_velocity = 0.0;
  double measured_force = -1.0;
  bool has_truth = false;
  Vec3 true_position = Vec3::Zero();
  double prior_error = -1.0;
  double posterior_error = -1.0;
};

struct TrialReport {
  int trial = 0;
  bool failed = false;
  std::string fail_reason;
  long ticks = 0;
  double duration = 0.0;
  double rms_tracking_error = 0.0;
  double max_abs_acceleration = 0.0;
  double max_abs_jerk = 0.0;
  double transition_time = 0.0;
  double mean_kp = 0.0;
  double prediction_rmse = -1.0;
  int mode_count = 0;
  int mode_event_count = 0;
  int new_mode_events = 0;
  double wall_time_ms = 0.0;
  std::vector<ContactReportEntry> contacts;
  std::vector<ModeEvent> events;
  std::vector<TransitionWindow> windows;
};

struct RunSummary {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::string controller;
  std::string model_policy;
  std::vector<TrialReport> trials;
};

/// Metrics recomputable from the tick stream alone.
struct RowMetrics {
  double rms_tracking_error = 0.0;
  double max_abs_acceleration = 0.0;
  double max_abs_jerk = 0.0;
  double transition_time = 0.0;
  double mean_kp = 0.0;
  double prediction_rmse = -1.0;
};

RowMetrics metrics_from_rows(const std::vector<TickRow>& rows, double dt);

TrialReport make_report(const TrialResult& result, double dt);

void write_csv(const std::string& path, const std::vector<TickRow>& rows);
std::vector<TickRow> read_csv(const std::string& path);

void write_events_jsonl(const std::string& path, const std::vector<ModeEvent>& events);

std::string summary_to_json(const RunSummary& summary);
RunSummary summary_from_json(const std::string& text);

struct ComparisonRow {
  int trial = 0;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

struct ComparisonTable {
  std::string metric;
  std::vector<ComparisonRow> rows;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_delta = 0.0;
  bool truncated = false;  // trial counts differed; compared common prefix
};

/// Named metric of one trial (see report fields); throws on unknown names.
double metric_value(const TrialReport& report, const std::string& metric);

ComparisonTable compare_runs(const RunSummary& a, const RunSummary& b,
                             const std::string& metric);

std::string comparison_to_json(const ComparisonTable& table);
std::string comparison_to_text(const ComparisonTable& table);

}  // namespace cct
