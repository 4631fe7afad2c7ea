#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lmem/experiments.hpp"
#include "lmem/io.hpp"
#include "lmem/parallel.hpp"

namespace {

void print_report(const lmem::ExperimentReport& rep) {
  for (const auto& c : rep.checks) {
    std::printf("%s %-40s value=%s %s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                lmem::format_double(c.value).c_str(), c.relation.empty() ? "" : c.relation.c_str(),
                c.relation.empty() ? "" : lmem::format_double(c.threshold).c_str());
  }
  std::printf("%s: %s\n", rep.experiment.c_str(), rep.passed() ? "all checks passed" : "CHECKS FAILED");
  for (const auto& f : rep.files) std::printf("  wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liouville-Majorana edge-mode experiments"};
  app.set_version_flag("--version", lmem::version_string());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  bool flip = false;

  auto* run = app.add_subcommand("run", "Run the experiment named in a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Override output_dir");
  run->add_flag("--flip-kappa-sign", flip, "Debug: flip the odd-kappa sign convention (oracle-suite only)");

  auto* verify = app.add_subcommand("verify", "Run the cross-construction oracle suite");
  verify->add_option("config", config_path, "Config (JSON); oracle-suite options are honoured")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--out", out_dir, "Override output_dir");
  verify->add_flag("--flip-kappa-sign", flip, "Debug: flip the odd-kappa sign convention");

  CLI11_PARSE(app, argc, argv);

  try {
    lmem::set_worker_count(jobs);
    lmem::ExperimentConfig cfg = lmem::load_config(config_path);
    if (verify->parsed() && cfg.experiment != "oracle-suite") {
      cfg.experiment = "oracle-suite";
      cfg.options = nlohmann::json::object();
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (flip) {
      if (cfg.experiment != "oracle-suite") throw lmem::ConfigError("--flip-kappa-sign applies to the oracle suite only");
      cfg.options["flip_kappa_sign"] = true;
    }
    const auto rep = lmem::run_experiment(cfg);
    print_report(rep);
    return rep.passed() ? 0 : 1;
  } catch (const lmem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
