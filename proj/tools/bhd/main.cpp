#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bhd/app/commands.hpp"
#include "bhd/app/config.hpp"
#include "bhd/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Balanced homodyne QRNG design and post-processing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out;
  std::optional<std::size_t> workers;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global RNG seed (overrides the config)");
  app.add_option("--mode", mode, "paper-literal or standard")->check(CLI::IsMember({"paper-literal", "standard"}));
  app.add_option("--out", out, "output directory");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  for (const auto& c : bhd::app::command_list()) app.add_subcommand(c.name, c.summary)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    // Help and version requests are successes; everything else is a usage error.
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    bhd::app::RunConfig cfg =
        config_path.empty() ? bhd::app::default_config() : bhd::app::load_config(config_path);
    if (seed) cfg.rng_seed = *seed;
    if (!mode.empty()) cfg.mode = bhd::design::parse_mode(mode);
    if (!out.empty()) cfg.output_dir = out;
    if (workers) cfg.workers = *workers;

    const std::string name = app.get_subcommands().front()->get_name();
    const auto report = bhd::app::run_command(name, cfg);
    std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bhd::app::exit_code_for(e);
  }
}
