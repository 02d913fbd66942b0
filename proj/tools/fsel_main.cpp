#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-state selection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "machine";

  const std::map<std::string, std::string> help = {
      {"generate", "write the first N symbols of the source"},
      {"select", "run the selector over the source and report counts"},
      {"stats", "word frequencies of the selected output at each checkpoint"},
      {"verify-preservation", "check that selection keeps the Bernoulli frequencies"},
      {"break-distribution", "build a strategy that breaks a non-Bernoulli or non-positive map"},
      {"predict", "compare selection rate and visits with the induced Markov chain"},
      {"analyze-dfa", "components, synchronizing word and induced chain of the selector"},
  };
  for (const std::string& name : fsel::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the seed of every sampled source");
    sub->add_option("--out", out, "write the report (or generated sequence) here");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"machine", "human"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fsel::cli::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  fsel::cli::ExperimentConfig config;
  try {
    config = fsel::cli::load_config(config_path);
  } catch (const fsel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fsel::cli::kExitUsage;
  }
  fsel::cli::RunOptions options;
  options.format = format;
  options.out = out;
  options.seed = seed;
  return fsel::cli::run_command(command, std::move(config), options, std::cout, std::cerr);
}
