// Command-line front end; talks to the library through the C API only.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cct/cct.h"

namespace {

namespace fs = std::filesystem;

int die(const std::string& context) {
  std::cerr << "error: " << context << ": " << cct_last_error() << "\n";
  return 1;
}

bool files_identical(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return ca == cb;
}

struct RunArgs {
  std::string scenario_path;
  std::string out_dir = "run_out";
  std::string controller;
  std::string model_policy;
  std::string resume_store;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool check = false;
};

cct_scenario* configure(const RunArgs& args) {
  cct_scenario* scenario = nullptr;
  if (cct_scenario_load(args.scenario_path.c_str(), &scenario) != CCT_OK) return nullptr;
  bool ok = true;
  if (args.seed_set) ok = ok && cct_scenario_set_seed(scenario, args.seed) == CCT_OK;
  if (args.trials > 0) ok = ok && cct_scenario_set_trials(scenario, args.trials) == CCT_OK;
  if (!args.controller.empty())
    ok = ok && cct_scenario_set_controller(scenario, args.controller.c_str()) == CCT_OK;
  if (!args.model_policy.empty())
    ok = ok && cct_scenario_set_model_policy(scenario, args.model_policy.c_str()) == CCT_OK;
  if (!args.resume_store.empty())
    ok = ok && cct_scenario_set_resume_store(scenario, args.resume_store.c_str()) == CCT_OK;
  if (!ok) {
    cct_scenario_free(scenario);
    return nullptr;
  }
  return scenario;
}

int run_once(const RunArgs& args, const std::string& out_dir, bool quiet) {
  cct_scenario* scenario = configure(args);
  if (!scenario) return die("configuring scenario");

  cct_run* run = nullptr;
  if (cct_run_scenario(scenario, &run) != CCT_OK) {
    cct_scenario_free(scenario);
    return die("running scenario");
  }
  if (cct_run_write(run, out_dir.c_str()) != CCT_OK) {
    cct_run_free(run);
    cct_scenario_free(scenario);
    return die("writing outputs");
  }

  int trials = 0;
  cct_run_trial_count(run, &trials);
  int failures = 0;
  for (int i = 0; i < trials; ++i) {
    int failed = 0;
    cct_run_trial_failed(run, i, &failed);
    failures += failed;
    if (!quiet) {
      double rms = 0.0, tt = 0.0;
      cct_run_metric(run, i, "rms_tracking_error", &rms);
      cct_run_metric(run, i, "transition_time", &tt);
      std::cout << "trial " << i + 1 << (failed ? " FAILED" : "")
                << "  rms_tracking_error=" << rms << "  transition_time=" << tt << "\n";
    }
  }
  if (!quiet) std::cout << "wrote " << out_dir << " (" << trials << " trials)\n";

  cct_run_free(run);
  cct_scenario_free(scenario);
  return failures > 0 ? 1 : 0;
}

int cmd_run(const RunArgs& args) {
  const int rc = run_once(args, args.out_dir, false);
  if (rc != 0 && !args.check) return rc;
  if (!args.check) return rc;

  // Check mode: no failed trials, and a re-run with the same seed must
  // produce byte-identical logs.
  if (rc != 0) {
    std::cerr << "check: FAILED (trial failure)\n";
    return 1;
  }
  const std::string verify_dir = args.out_dir + "_check";
  const int rc2 = run_once(args, verify_dir, true);
  if (rc2 != 0) {
    std::cerr << "check: FAILED (verification run)\n";
    return 1;
  }
  bool identical = true;
  for (const auto& entry : fs::directory_iterator(args.out_dir)) {
    if (entry.path().extension() != ".csv" && entry.path().extension() != ".jsonl") continue;
    const fs::path other = fs::path(verify_dir) / entry.path().filename();
    if (!files_identical(entry.path(), other)) {
      std::cerr << "check: log mismatch on " << entry.path().filename().string() << "\n";
      identical = false;
    }
  }
  fs::remove_all(verify_dir);
  if (!identical) {
    std::cerr << "check: FAILED (non-deterministic logs)\n";
    return 1;
  }
  std::cout << "check: OK (deterministic, no failed trials)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Changing-contact manipulation benchmark harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write logs");
  run->add_option("-s,--scenario", run_args.scenario_path, "Scenario config file")
      ->required();
  run->add_option("-o,--out", run_args.out_dir, "Output directory");
  auto* seed_opt = run->add_option("--seed", run_args.seed, "Seed override");
  run->add_option("--trials", run_args.trials, "Trial count override");
  run->add_option("--controller", run_args.controller,
                  "Controller override: avic | fixed_gain | avic_no_anticipation");
  run->add_option("--model-policy", run_args.model_policy,
                  "Model policy override: incremental | frozen_pretrained");
  run->add_option("--store", run_args.resume_store, "Resume from a store.json");
  run->add_flag("--check", run_args.check,
                "Verify determinism and fail on any trial failure");

  std::string cmp_a, cmp_b, cmp_metric = "rms_tracking_error", cmp_out;
  CLI::App* cmp = app.add_subcommand("compare", "Compare two run directories");
  cmp->add_option("-a", cmp_a, "First run directory")->required();
  cmp->add_option("-b", cmp_b, "Second run directory")->required();
  cmp->add_option("-m,--metric", cmp_metric, "Metric name");
  cmp->add_option("-o,--out", cmp_out, "Write the comparison JSON here");

  std::string exp_dir, exp_format = "csv", exp_out;
  CLI::App* exp = app.add_subcommand("export", "Export plottable series or summaries");
  exp->add_option("-r,--run", exp_dir, "Run directory")->required();
  exp->add_option("-f,--format", exp_format, "csv | json");
  exp->add_option("-o,--out", exp_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    run_args.seed_set = seed_opt->count() > 0;
    return cmd_run(run_args);
  }

  if (cmp->parsed()) {
    char* json_text = nullptr;
    char* table_text = nullptr;
    if (cct_compare_dirs(cmp_a.c_str(), cmp_b.c_str(), cmp_metric.c_str(), &json_text,
                         &table_text) != CCT_OK)
      return die("comparing runs");
    std::cout << table_text;
    if (!cmp_out.empty()) {
      std::ofstream out(cmp_out, std::ios::binary);
      out << json_text << "\n";
    }
    cct_string_free(json_text);
    cct_string_free(table_text);
    return 0;
  }

  if (exp->parsed()) {
    if (cct_export_run(exp_dir.c_str(), exp_format.c_str(), exp_out.c_str()) != CCT_OK)
      return die("exporting run");
    std::cout << "exported " << exp_dir << " -> " << exp_out << "\n";
    return 0;
  }
  return 0;
}
