// Command-line front end for the simulator.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "supernova/supernova.hpp"

namespace {

using namespace supernova;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> combination;
  std::optional<std::string> mode;
  std::optional<std::string> deviation;
  std::optional<std::string> metric;
};

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.combination) cfg.combination = *o.combination;
  if (o.mode) apply_setting(cfg, "mode", *o.mode);
  if (o.deviation) apply_setting(cfg, "deviation", *o.deviation);
  if (o.metric) apply_setting(cfg, "metric", *o.metric);
  cfg.validate();
  return cfg;
}

void report(const std::string& what, const ExperimentConfig& cfg, std::size_t files) {
  std::cerr << what << ": wrote " << files << " file(s) to " << cfg.out_dir << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-peer storage availability simulator"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "key=value configuration file");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "output directory");

  auto* gen_graph = app.add_subcommand("gen-graph", "write the friendship graph as an edge list");
  auto* gen_traces = app.add_subcommand("gen-traces", "write base and deviated uptime traces");
  auto* run = app.add_subcommand("run", "run a single combination");
  run->add_option("--combination", o.combination, "C1..C8 or custom");
  run->add_option("--mode", o.mode, "sp or flat")->check(CLI::IsMember({"sp", "flat"}));
  run->add_option("--deviation", o.deviation, "on or off")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--metric", o.metric, "tt or ft")->check(CLI::IsMember({"tt", "ft"}));
  auto* matrix = app.add_subcommand("matrix", "C1..C8 with and without deviation");
  matrix->add_option("--metric", o.metric, "tt or ft")->check(CLI::IsMember({"tt", "ft"}));
  auto* compare = app.add_subcommand("compare", "FT/TT, flat/super-peer and best/worst panels");
  compare->add_option("--metric", o.metric, "tt or ft")->check(CLI::IsMember({"tt", "ft"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(o);
    const auto started = std::chrono::steady_clock::now();
    const World world = build_world(cfg);
    OutputFiles files;

    if (*gen_graph) {
      files["graph.txt"] = write_edge_list(world.graph);
      std::string sp = "node\n";
      for (NodeId id : world.graph.super_peers()) sp += std::to_string(id) + '\n';
      files["super_peers.csv"] = sp;
    } else if (*gen_traces) {
      files["traces.csv"] = write_traces_csv(world.sp_base);
      files["traces_deviated.csv"] = write_traces_csv(world.sp_deviated);
    } else if (*run) {
      const BundleResult b = run_combination(world, cfg);
      add_bundle_files(files, b, cfg);
      files[b.name + "/placement.csv"] = write_placement_csv(b.placements);
    } else if (*matrix) {
      files = matrix_files(run_matrix(world, cfg), cfg);
    } else if (*compare) {
      files = comparison_files(run_comparisons(world, cfg));
    }
    write_files(cfg.out_dir, files);
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    report(app.get_subcommands().front()->get_name(), cfg, files.size());
    std::fprintf(stderr, "elapsed %.2f s\n", secs.count());
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
