#pragma once

#include <string>
#include <vector>

#include "cct/report.hpp"
#include "cct/scenario.hpp"
#include "cct/store.hpp"
#include "cct/trial.hpp"

namespace cct {

struct RunResult {
  RunSummary summary;
  std::vector<TrialResult> trials;
  PersistentState state;
};

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<int> trials_override;
  std::optional<ControllerKind> controller_override;
  std::optional<ModelPolicy> model_policy_override;
  std::string resume_store;  // load persistent state before the first trial
};

Scenario apply_overrides(Scenario scenario, const RunOptions& options);

/// Execute all trials sequentially, carrying persisted state as the
/// scenario requests. A failed trial is reported and the run continues.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Pretraining for the frozen-model policy: run the referenced scenario,
/// rebuild the training stream from its logs, and batch-fit.
MixtureModel pretrain_frozen_model(const Scenario& scenario);

/// Write trial CSVs, mode-event logs, the run summary, and the final
/// persistent-state store under out_dir.
void write_run(const std::string& out_dir, const Scenario& scenario, const RunResult& result);

RunSummary load_summary(const std::string& run_dir);

/// Derived per-tick series (speed, acceleration, jerk, force magnitude)
/// for plotting; written next to the source CSV.
void export_run(const std::string& run_dir, const std::string& format,
                const std::string& out_path);

/// Training points rebuilt from a logged tick stream: previous state
/// channels joined with current effect channels.
std::vector<Vec6> training_points_from_rows(const std::vector<TickRow>& rows);

}  // namespace cct
