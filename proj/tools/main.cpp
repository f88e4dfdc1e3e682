#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "degparab/commands.hpp"

int main(int argc, char** argv) {
  using namespace degparab;

  CLI::App app{"weakly degenerate parabolic operator toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool verbose = false;

  struct Entry {
    const char* name;
    const char* desc;
    int (*fn)(const RunOptions&);
  };
  const Entry entries[] = {
      {"solve", "forward solve with Dirichlet boundary control", &run_solve},
      {"adjoint", "adjoint solve backward from terminal data", &run_adjoint},
      {"carleman", "admissibility report and weighted ratio sweep", &run_carleman},
      {"duality", "control-to-adjoint duality identity", &run_duality},
      {"control", "penalized boundary control synthesis", &run_control},
      {"hardy", "weighted Hardy-type inequality margins", &run_hardy},
  };
  std::map<std::string, int (*)(const RunOptions&)> dispatch;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.desc);
    sub->add_option("--config", config_path, "experiment config (ini)")->required();
    sub->add_option("--out", out_override, "output directory (overrides config)");
    sub->add_option("--seed", seed_override, "rng seed (overrides config)");
    sub->add_flag("--verbose", verbose, "print a one-line status");
    dispatch[e.name] = e.fn;
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* chosen = app.get_subcommands().front();

  RunOptions ro;
  try {
    ro.cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) ro.cfg.output_dir = out_override;
  if (chosen->count("--seed") > 0) ro.cfg.seed = seed_override;
  ro.outdir = ro.cfg.output_dir;
  ro.verbose = verbose;

  try {
    return dispatch[chosen->get_name()](ro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
