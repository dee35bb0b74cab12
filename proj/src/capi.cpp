#include "cct/cct.h"

#include <cstring>
#include <string>

#include "cct/bench.hpp"

struct cct_scenario {
  cct::Scenario scenario;
  cct::RunOptions options;
};

struct cct_run {
  cct::Scenario scenario;
  cct::RunResult result;
};

namespace {

thread_local std::string g_last_error;

cct_status fail(cct_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
cct_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(CCT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CCT_ERR_RUNTIME, e.what());
  }
}

}  // namespace

extern "C" {

const char* cct_version(void) { return "1.0.0"; }

const char* cct_last_error(void) { return g_last_error.c_str(); }

void cct_string_free(char* s) { std::free(s); }

cct_status cct_scenario_load(const char* path, cct_scenario** out) {
  if (!path || !out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto handle = new cct_scenario{cct::Scenario::load(path), {}};
    *out = handle;
    return CCT_OK;
  });
}

void cct_scenario_free(cct_scenario* scenario) { delete scenario; }

cct_status cct_scenario_set_seed(cct_scenario* scenario, uint64_t seed) {
  if (!scenario) return fail(CCT_ERR_INVALID_ARGUMENT, "null scenario");
  scenario->options.seed_override = seed;
  return CCT_OK;
}

cct_status cct_scenario_set_trials(cct_scenario* scenario, int trials) {
  if (!scenario) return fail(CCT_ERR_INVALID_ARGUMENT, "null scenario");
  if (trials < 1) return fail(CCT_ERR_INVALID_ARGUMENT, "trials must be >= 1");
  scenario->options.trials_override = trials;
  return CCT_OK;
}

cct_status cct_scenario_set_controller(cct_scenario* scenario, const char* kind) {
  if (!scenario || !kind) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    scenario->options.controller_override = cct::controller_kind_from_string(kind);
    return CCT_OK;
  });
}

cct_status cct_scenario_set_model_policy(cct_scenario* scenario, const char* policy) {
  if (!scenario || !policy) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    scenario->options.model_policy_override = cct::model_policy_from_string(policy);
    return CCT_OK;
  });
}

cct_status cct_scenario_set_resume_store(cct_scenario* scenario, const char* store_path) {
  if (!scenario || !store_path) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  scenario->options.resume_store = store_path;
  return CCT_OK;
}

cct_status cct_run_scenario(cct_scenario* scenario, cct_run** out) {
  if (!scenario || !out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto run = new cct_run;
    run->scenario = cct::apply_overrides(scenario->scenario, scenario->options);
    run->result = cct::run_scenario(scenario->scenario, scenario->options);
    *out = run;
    return CCT_OK;
  });
}

void cct_run_free(cct_run* run) { delete run; }

cct_status cct_run_write(const cct_run* run, const char* out_dir) {
  if (!run || !out_dir) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cct::write_run(out_dir, run->scenario, run->result);
    return CCT_OK;
  });
}

cct_status cct_run_summary_json(const cct_run* run, char** json_out) {
  if (!run || !json_out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *json_out = dup_string(cct::summary_to_json(run->result.summary));
    return *json_out ? CCT_OK : fail(CCT_ERR_RUNTIME, "allocation failed");
  });
}

cct_status cct_run_trial_count(const cct_run* run, int* out) {
  if (!run || !out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  *out = static_cast<int>(run->result.summary.trials.size());
  return CCT_OK;
}

cct_status cct_run_trial_failed(const cct_run* run, int trial, int* out) {
  if (!run || !out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  if (trial < 0 || trial >= static_cast<int>(run->result.summary.trials.size()))
    return fail(CCT_ERR_INVALID_ARGUMENT, "trial index out of range");
  *out = run->result.summary.trials[trial].failed ? 1 : 0;
  return CCT_OK;
}

cct_status cct_run_metric(const cct_run* run, int trial, const char* metric, double* out) {
  if (!run || !metric || !out) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  if (trial < 0 || trial >= static_cast<int>(run->result.summary.trials.size()))
    return fail(CCT_ERR_INVALID_ARGUMENT, "trial index out of range");
  return guarded([&] {
    *out = cct::metric_value(run->result.summary.trials[trial], metric);
    return CCT_OK;
  });
}

cct_status cct_compare_dirs(const char* run_dir_a, const char* run_dir_b, const char* metric,
                            char** json_out, char** text_out) {
  if (!run_dir_a || !run_dir_b || !metric)
    return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const cct::RunSummary a = cct::load_summary(run_dir_a);
    const cct::RunSummary b = cct::load_summary(run_dir_b);
    const cct::ComparisonTable table = cct::compare_runs(a, b, metric);
    if (json_out) *json_out = dup_string(cct::comparison_to_json(table));
    if (text_out) *text_out = dup_string(cct::comparison_to_text(table));
    return CCT_OK;
  });
}

cct_status cct_export_run(const char* run_dir, const char* format, const char* out_path) {
  if (!run_dir || !format || !out_path) return fail(CCT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cct::export_run(run_dir, format, out_path);
    return CCT_OK;
  });
}

}  // extern "C"
