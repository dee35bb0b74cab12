#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "cct/cct.h"

namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(CCT_SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("the shared-library interface runs a scenario end to end") {
  cct_scenario* scenario = nullptr;
  REQUIRE(cct_scenario_load(scenario_path("porridge_train.json").c_str(), &scenario) == CCT_OK);
  REQUIRE(scenario != nullptr);
  CHECK(cct_scenario_set_seed(scenario, 99) == CCT_OK);
  CHECK(cct_scenario_set_trials(scenario, 1) == CCT_OK);

  cct_run* run = nullptr;
  REQUIRE(cct_run_scenario(scenario, &run) == CCT_OK);
  int trials = 0;
  CHECK(cct_run_trial_count(run, &trials) == CCT_OK);
  CHECK(trials == 1);

  int failed = 1;
  CHECK(cct_run_trial_failed(run, 0, &failed) == CCT_OK);
  CHECK(failed == 0);

  double rms = -1.0;
  CHECK(cct_run_metric(run, 0, "rms_tracking_error", &rms) == CCT_OK);
  CHECK(rms > 0.0);

  char* summary = nullptr;
  REQUIRE(cct_run_summary_json(run, &summary) == CCT_OK);
  CHECK(std::strstr(summary, "porridge_train") != nullptr);
  cct_string_free(summary);

  const fs::path dir = fs::temp_directory_path() / "cct_capi_run";
  fs::remove_all(dir);
  REQUIRE(cct_run_write(run, dir.string().c_str()) == CCT_OK);
  CHECK(fs::exists(dir / "trial_001.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "store.json"));

  // Post-processing entry points against the written directory.
  char* table_json = nullptr;
  char* table_text = nullptr;
  CHECK(cct_compare_dirs(dir.string().c_str(), dir.string().c_str(), "rms_tracking_error",
                         &table_json, &table_text) == CCT_OK);
  CHECK(std::strstr(table_json, "\"mean_delta\": 0.0") != nullptr);
  cct_string_free(table_json);
  cct_string_free(table_text);

  const fs::path exp = fs::temp_directory_path() / "cct_capi_export";
  fs::remove_all(exp);
  CHECK(cct_export_run(dir.string().c_str(), "csv", exp.string().c_str()) == CCT_OK);
  CHECK(fs::exists(exp / "trial_001_series.csv"));

  cct_run_free(run);
  cct_scenario_free(scenario);
  fs::remove_all(dir);
  fs::remove_all(exp);
}

TEST_CASE("error paths report status codes and messages") {
  cct_scenario* scenario = nullptr;
  CHECK(cct_scenario_load("/nonexistent/scenario.json", &scenario) != CCT_OK);
  CHECK(std::strlen(cct_last_error()) > 0);
  CHECK(scenario == nullptr);

  CHECK(cct_scenario_load(nullptr, &scenario) == CCT_ERR_INVALID_ARGUMENT);
  CHECK(cct_scenario_set_seed(nullptr, 1) == CCT_ERR_INVALID_ARGUMENT);

  cct_scenario* good = nullptr;
  REQUIRE(cct_scenario_load(scenario_path("porridge_train.json").c_str(), &good) == CCT_OK);
  CHECK(cct_scenario_set_trials(good, 0) == CCT_ERR_INVALID_ARGUMENT);
  CHECK(cct_scenario_set_controller(good, "bogus") == CCT_ERR_INVALID_ARGUMENT);

  cct_run* run = nullptr;
  REQUIRE(cct_run_scenario(good, &run) == CCT_OK);
  double out = 0.0;
  CHECK(cct_run_metric(run, 0, "no_such_metric", &out) == CCT_ERR_INVALID_ARGUMENT);
  CHECK(cct_run_metric(run, 5, "rms_tracking_error", &out) == CCT_ERR_INVALID_ARGUMENT);

  cct_run_free(run);
  cct_scenario_free(good);

  CHECK(cct_compare_dirs("/nope_a", "/nope_b", "rms_tracking_error", nullptr, nullptr) !=
        CCT_OK);
  CHECK(std::strcmp(cct_version(), "") != 0);
}
