#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "alvar/harness/commands.hpp"
#include "alvar/harness/config.hpp"

namespace {

int fail(const std::string& command, const std::string& message, int status = 1) {
  nlohmann::json line{{"status", "error"}, {"command", command}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace alvar::harness;

  CLI::App app{"ALVar experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> particles;
  std::optional<std::size_t> steps;
  std::optional<std::string> out;

  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--particles", particles, "number of particles N");
    sub->add_option("--steps", steps, "number of filter steps n");
    sub->add_option("--out", out, "output directory");
  }

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    bool known = false;
    for (const auto& name : command_names()) known = known || name == first;
    if (!known) return fail(first, "unknown subcommand '" + first + "'", 2);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("", e.what(), 2);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (particles) cfg.particles = *particles;
    if (steps) cfg.steps = *steps;
    if (out) cfg.out_dir = *out;
    cfg.validate();
    const auto manifest = run_command(command, cfg);
    nlohmann::json line{{"status", "ok"}, {"command", command}, {"out", cfg.out_dir},
                        {"summary", manifest["summary"]}};
    std::cout << line.dump() << '\n';
  } catch (const std::exception& e) {
    return fail(command, e.what());
  }
  return 0;
}
