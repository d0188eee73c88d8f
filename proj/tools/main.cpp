#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermal/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"thermal_spectra: variational and lattice spectrum estimation"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::vector<std::string> overrides;
    long seed = -1;
    std::string out;
  };

  std::vector<std::pair<std::string, std::string>> commands = {
      {"qvi", "free-energy minimization over a truncated basis"},
      {"qml", "empirical relative-entropy training on sampled path endpoints"},
      {"lattice", "periodic-path correlator and cosh fit of the first gap"},
      {"oracle", "dense diagonalization reference spectrum"},
      {"sample", "generate and store a path/endpoint bank"},
      {"compare", "per-state gap and L2 differences between two results"}};

  std::map<std::string, Options> opts;
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    Options& o = opts[name];
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--set", o.overrides, "override, dotted key=value (repeatable)");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--out", o.out, "output directory");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  const Options& o = opts[command];

  std::vector<std::string> overrides = o.overrides;
  if (o.seed >= 0) overrides.push_back("seed=" + std::to_string(o.seed));
  if (!o.out.empty()) overrides.push_back("out=" + o.out);

  try {
    const thermal::RunConfig config = thermal::parse_config(command, o.config, overrides);
    return thermal::run(config);
  } catch (const thermal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
