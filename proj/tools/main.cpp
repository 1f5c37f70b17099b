#include <CLI11.hpp>

#include <iostream>

#include "ddrlab/eikonal.hpp"
#include "scenario.hpp"

using namespace ddrlab;

int main(int argc, char** argv) {
  CLI::App app{"ddrlab: distance difference representation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  bool strict = false;

  auto add_run = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "scenario file (YAML or JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "replace every seed of the scenario");
    sub->add_option("--jobs", jobs, "worker threads");
    sub->add_flag("--strict", strict, "treat report-only warnings as failures");
    return sub;
  };
  auto* run = add_run("run", "run every experiment of a scenario");
  auto* lemmas = add_run("check-lemmas", "run the lemma and invariant checks only");
  auto* recon = add_run("reconstruct", "run the reconstruction experiments only");
  auto* stab = add_run("stability", "run the stability sweeps only");

  auto* cache = app.add_subcommand("cache", "inspect the distance field cache");
  cache->require_subcommand(1);
  auto* ls = cache->add_subcommand("ls", "list cached fields");
  auto* clear = cache->add_subcommand("clear", "delete cached fields");

  CLI11_PARSE(app, argc, argv);

  auto& fc = FieldCache::global();
  if (cache->parsed()) {
    if (!fc.directory()) {
      std::cerr << "cache: DDRLAB_CACHE_DIR is not set\n";
      return 2;
    }
    if (ls->parsed()) {
      for (const auto& e : fc.list_disk()) {
        std::cout << e.path.filename().string() << "\t" << e.nx << "x" << e.ny << "\t(" << e.source.x() << ", "
                  << e.source.y() << ")\t" << e.bytes << "\n";
      }
    } else if (clear->parsed()) {
      std::cout << "removed " << fc.clear_disk() << " fields\n";
    }
    return 0;
  }

  try {
    auto cfg = cli::parse_config(config_path);
    if (seed) cli::override_seed(cfg, *seed);
    if (jobs) cfg.jobs = jobs;
    cli::RunOptions opts;
    opts.strict = strict;
    if (!out_dir.empty()) opts.out = out_dir;
    if (lemmas->parsed()) opts.filter = cli::is_lemma_experiment;
    if (recon->parsed()) opts.filter = cli::is_reconstruction_experiment;
    if (stab->parsed()) opts.filter = [](const std::string& id) { return id == "stability"; };
    (void)run;
    const auto report = cli::run_scenario(cfg, opts);
    for (const auto& e : report.experiments) {
      std::cout << e.index << " " << e.id << ": " << cli::to_string(e.status);
      for (const auto& w : e.warnings) std::cout << " [warning: " << w << "]";
      std::cout << "\n";
    }
    return report.failed() ? 1 : 0;
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
