#include "cct/bench.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace cct {

namespace fs = std::filesystem;
using nlohmann::json;

Scenario apply_overrides(Scenario scenario, const RunOptions& options) {
  if (options.seed_override) scenario.sim.rng_seed = *options.seed_override;
  if (options.trials_override) scenario.trials = *options.trials_override;
  if (options.controller_override) scenario.controller = *options.controller_override;
  if (options.model_policy_override) scenario.model_policy = *options.model_policy_override;
  return scenario;
}

std::vector<Vec6> training_points_from_rows(const std::vector<TickRow>& rows) {
  std::vector<Vec6> points;
  if (rows.size() < 2) return points;
  points.reserve(rows.size() - 1);
  for (size_t k = 1; k < rows.size(); ++k) {
    const TickRow& prev = rows[k - 1];
    const TickRow& now = rows[k];
    Vec6 p;
    p << prev.velocity.norm(), std::abs(prev.angular_velocity), prev.force.norm(),
        std::abs(prev.torque), now.force.norm(), std::abs(now.torque);
    points.push_back(p);
  }
  return points;
}

MixtureModel pretrain_frozen_model(const Scenario& scenario) {
  if (scenario.pretrain_scenario.empty())
    throw std::runtime_error("frozen_pretrained policy needs pretrain_scenario");
  Scenario train = Scenario::load(scenario.pretrain_scenario);
  RunResult rr = run_scenario(train);
  std::vector<Vec6> points;
  for (const auto& trial : rr.trials) {
    auto tp = training_points_from_rows(trial.rows);
    points.insert(points.end(), tp.begin(), tp.end());
  }
  if (points.empty()) throw std::runtime_error("pretraining produced no data");
  return MixtureModel::fit_batch(points, scenario.pretrain_components, scenario.model, 200,
                                 scenario.sim.rng_seed);
}

RunResult run_scenario(const Scenario& base_scenario, const RunOptions& options) {
  const Scenario scenario = apply_overrides(base_scenario, options);

  RunResult result;
  result.summary.scenario_name = scenario.name;
  result.summary.seed = scenario.sim.rng_seed;
  result.summary.controller = to_string(scenario.controller);
  result.summary.model_policy = to_string(scenario.model_policy);

  if (!options.resume_store.empty())
    load_store(options.resume_store, scenario, result.state);

  if (scenario.model_policy == ModelPolicy::FrozenPretrained && !result.state.pretrained)
    result.state.pretrained = pretrain_frozen_model(scenario);

  for (int trial = 0; trial < scenario.trials; ++trial) {
    TrialResult tr = run_trial(scenario, result.state, trial);
    result.summary.trials.push_back(make_report(tr, scenario.sim.timestep));
    result.trials.push_back(std::move(tr));
  }
  return result;
}

namespace {

std::string trial_stem(int index) {
  std::ostringstream name;
  name << "trial_" << std::setw(3) << std::setfill('0') << index + 1;
  return name.str();
}

}  // namespace

void write_run(const std::string& out_dir, const Scenario& scenario, const RunResult& result) {
  fs::create_directories(out_dir);
  for (const auto& trial : result.trials) {
    const std::string stem = trial_stem(trial.trial_index);
    write_csv((fs::path(out_dir) / (stem + ".csv")).string(), trial.rows);
    write_events_jsonl((fs::path(out_dir) / (stem + "_events.jsonl")).string(),
                       trial.mode_events);
  }
  {
    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary.json in " + out_dir);
    out << summary_to_json(result.summary) << "\n";
  }
  save_store((fs::path(out_dir) / "store.json").string(), result.state);
  (void)scenario;
}

RunSummary load_summary(const std::string& run_dir) {
  const fs::path path = fs::path(run_dir) / "summary.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return summary_from_json(text);
}

void export_run(const std::string& run_dir, const std::string& format,
                const std::string& out_path) {
  const RunSummary summary = load_summary(run_dir);
  fs::create_directories(out_path);

  if (format == "json") {
    // Re-derived summary: metrics recomputed from the tick logs.
    RunSummary rederived = summary;
    for (auto& rep : rederived.trials) {
      const fs::path csv = fs::path(run_dir) / (trial_stem(rep.trial) + ".csv");
      const auto rows = read_csv(csv.string());
      const double dt = rows.size() > 1 ? rows[1].time - rows[0].time : 1.0;
      const RowMetrics m = metrics_from_rows(rows, dt);
      rep.rms_tracking_error = m.rms_tracking_error;
      rep.max_abs_acceleration = m.max_abs_acceleration;
      rep.max_abs_jerk = m.max_abs_jerk;
      rep.transition_time = m.transition_time;
      rep.mean_kp = m.mean_kp;
      rep.prediction_rmse = m.prediction_rmse;
    }
    std::ofstream out(fs::path(out_path) / "summary_rederived.json", std::ios::binary);
    out << summary_to_json(rederived) << "\n";
    return;
  }

  if (format != "csv") throw std::invalid_argument("unknown export format: " + format);

  for (const auto& rep : summary.trials) {
    const fs::path csv = fs::path(run_dir) / (trial_stem(rep.trial) + ".csv");
    const auto rows = read_csv(csv.string());
    if (rows.empty()) continue;
    const double dt = rows.size() > 1 ? rows[1].time - rows[0].time : 1.0;

    std::ofstream out(fs::path(out_path) / (trial_stem(rep.trial) + "_series.csv"),
                      std::ios::binary);
    out << "time,speed,acc,jerk,force_mag,lambda,kp_mean,target_speed,phase\n";
    std::vector<double> speed(rows.size()), acc(rows.size(), 0.0), jerk(rows.size(), 0.0);
    for (size_t k = 0; k < rows.size(); ++k) speed[k] = rows[k].velocity.norm();
    for (size_t k = 0; k + 1 < rows.size(); ++k)
      acc[k] = (rows[k + 1].velocity - rows[k].velocity).norm() / dt;
    for (size_t k = 0; k + 1 < rows.size(); ++k) jerk[k] = std::abs(acc[k + 1] - acc[k]) / dt;
    out << std::setprecision(17);
    for (size_t k = 0; k < rows.size(); ++k) {
      out << rows[k].time << ',' << speed[k] << ',' << acc[k] << ',' << jerk[k] << ','
          << rows[k].force.norm() << ',' << rows[k].lambda << ',' << rows[k].kp.mean() << ','
          << rows[k].target_speed << ',' << rows[k].phase << "\n";
    }
  }
}

}  // namespace cct
