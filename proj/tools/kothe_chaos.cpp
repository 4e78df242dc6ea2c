// kothe-chaos: batch front end for the backward-shift scrambled-family
// pipeline. See README.md for the subcommand and exit-code contract.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kothe/config.hpp"
#include "kothe/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "experiment configuration (JSON)")
      ->required();
  sub->add_option("--out", o.out_dir, "output directory (overrides config)");
  sub->add_option("--seed", o.seed, "RNG seed (overrides config)");
}

bool logging_enabled() {
  const char* v = std::getenv("KOTHE_CHAOS_LOG");
  return v != nullptr && *v != '\0';
}

kothe::ExperimentConfig load(const CommonOpts& o) {
  kothe::ExperimentConfig cfg = kothe::load_config(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int run_full(const CommonOpts& o, bool write, bool print_summary) {
  kothe::ExperimentConfig cfg = load(o);
  kothe::PipelineResult res = kothe::run_pipeline(cfg, logging_enabled());
  if (write) kothe::write_outputs(res, cfg.out_dir);
  if (print_summary) {
    std::cout << "mode: " << cfg.mode << "\n";
    std::cout << "ok: " << (res.exit_code == 0 ? "true" : "false") << "\n";
    for (const auto& f : res.failures) std::cout << "failed: " << f << "\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"backward-shift distributional-chaos pipeline"};
  app.require_subcommand(1);

  CommonOpts o;
  CLI::App* validate = app.add_subcommand("validate", "matrix axioms, continuity, membership");
  CLI::App* metric = app.add_subcommand("metric", "witness pair distance");
  CLI::App* profile = app.add_subcommand("profile", "witness distributional profile (CSV)");
  CLI::App* build = app.add_subcommand("build", "schedules, amplified witness, sign layout");
  CLI::App* verify = app.add_subcommand("verify", "construction inequalities and pair verdicts");
  CLI::App* report = app.add_subcommand("report", "run everything and write all artifacts");
  CLI::App* run = app.add_subcommand("run", "alias for report");
  for (CLI::App* s : {validate, metric, profile, build, verify, report, run})
    add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      kothe::ExperimentConfig cfg = load(o);
      kothe::PipelineResult res = kothe::run_pipeline(cfg, logging_enabled());
      std::cout << res.report["matrix_validation"].dump(2) << "\n";
      std::cout << res.report["continuity"].dump(2) << "\n";
      std::cout << res.report["membership"].dump(2) << "\n";
      bool ok = res.report["matrix_validation"]["valid_on_window"].get<bool>();
      for (const auto& c : res.report["continuity"]) ok = ok && c["satisfied"].get<bool>();
      return ok ? 0 : 1;
    }
    if (metric->parsed()) {
      kothe::ExperimentConfig cfg = load(o);
      kothe::SpaceContext ctx = cfg.context();
      kothe::MetricValue d = ctx.distance(cfg.x, cfg.y);
      std::cout.precision(17);
      std::cout << "d(x,y) = " << d.value << " (+/- " << d.truncation_error_bound << ")\n";
      return 0;
    }
    if (profile->parsed()) {
      kothe::ExperimentConfig cfg = load(o);
      kothe::SpaceContext ctx = cfg.context();
      kothe::DistributionalProfile prof =
          kothe::profile(cfg.x, cfg.y, cfg.t_grid, cfg.horizons, ctx);
      std::string csv = kothe::profile_to_csv(prof);
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream f(std::filesystem::path(cfg.out_dir) / "profiles.csv");
        f << csv;
      }
      std::cout << csv;
      return 0;
    }
    if (build->parsed() || verify->parsed() || report->parsed() || run->parsed())
      return run_full(o, /*write=*/true, /*print_summary=*/true);
  } catch (const kothe::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
