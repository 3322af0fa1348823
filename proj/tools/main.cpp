#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pfmpc/cli_app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"potential-field MPC safety controller: scenario runner"};
  app.require_subcommand(1);

  pfmpc::cli::RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run one scenario (or a suite) with one controller");
  run->add_option("--scenario", run_opt.scenario_path, "scenario JSON file");
  run->add_option("--suite", run_opt.suite_dir, "directory of scenario JSON files");
  run->add_option("--controller", run_opt.variant, "tracking-pid | mpc | mpc-pf")
      ->capture_default_str();
  run->add_option("--config", run_opt.config_path, "INI config file (defaults used if omitted)");
  run->add_option("--seed", run_opt.seed, "seed recorded in metrics")->capture_default_str();
  run->add_option("--out", run_opt.out_dir, "output directory")->capture_default_str();
  run->add_flag("--no-timestamps", run_opt.no_timestamps,
                "omit wall-clock fields so outputs are byte-reproducible");

  pfmpc::cli::CompareOptions cmp_opt;
  CLI::App* cmp = app.add_subcommand("compare", "Run controller variants side by side");
  cmp->add_option("--scenario", cmp_opt.scenario_path, "scenario JSON file");
  cmp->add_option("--suite", cmp_opt.suite_dir, "directory of scenario JSON files");
  cmp->add_option("--controller", cmp_opt.variants,
                  "variant to include (repeatable; default: all three)");
  cmp->add_option("--config", cmp_opt.config_path, "INI config file");
  cmp->add_option("--seed", cmp_opt.seed, "seed recorded in metrics")->capture_default_str();
  cmp->add_option("--out", cmp_opt.out_dir, "output directory")->capture_default_str();
  cmp->add_flag("--no-timestamps", cmp_opt.no_timestamps,
                "omit wall-clock fields so outputs are byte-reproducible");

  CLI11_PARSE(app, argc, argv);

  const auto one_source = [](const std::string& scenario, const std::string& suite) {
    if (scenario.empty() == suite.empty()) {
      std::cerr << "error: provide exactly one of --scenario or --suite\n";
      return false;
    }
    return true;
  };

  if (run->parsed()) {
    if (!one_source(run_opt.scenario_path, run_opt.suite_dir)) return pfmpc::cli::kExitBadInput;
    return pfmpc::cli::run_command(run_opt, std::cout, std::cerr);
  }
  if (!one_source(cmp_opt.scenario_path, cmp_opt.suite_dir)) return pfmpc::cli::kExitBadInput;
  return pfmpc::cli::compare_command(cmp_opt, std::cout, std::cerr);
}
