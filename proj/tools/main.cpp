#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "curvlab/config.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/pipeline.hpp"

int main(int argc, char** argv) {
  if (const char* env = std::getenv("CURVLAB_THREADS")) {
    const int n = std::atoi(env);
    Eigen::setNbThreads(n < 1 ? 1 : n);
  }

  CLI::App app{"numerical laboratory for prescribed-curvature data on closed surfaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned long long seed = 0;
  bool override_hypothesis = false;
  for (const std::string& verb : curvlab::command_verbs()) {
    CLI::App* sub = app.add_subcommand(verb, verb + " pipeline");
    sub->add_option("--config", config_path, "JSON run configuration (defaults used when absent)");
    sub->add_option("--out", out_dir, "output directory (default: ./<verb>-out)");
    sub->add_option("--seed", seed, "override the configured RNG seed");
    sub->add_flag("--override-hypothesis", override_hypothesis,
                  "iterate even when the existence hypothesis fails (stamped in the report)");
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  const std::string verb = sub->get_name();

  try {
    curvlab::RunConfig config;
    if (!config_path.empty()) config = curvlab::load_config(config_path);
    if (sub->count("--seed") > 0) config.seed = seed;
    config.override_hypothesis = config.override_hypothesis || override_hypothesis;
    if (out_dir.empty()) out_dir = verb + "-out";

    const curvlab::CommandResult result = curvlab::run_command(verb, config, out_dir);
    std::cout << verb << ": wrote " << result.artifacts.size() << " artifacts to "
              << result.out_dir << "\n";
    return 0;
  } catch (const curvlab::PreconditionError& e) {
    std::cerr << "error (precondition): " << e.what() << "\n";
    return 1;
  } catch (const curvlab::ConvergenceError& e) {
    std::cerr << "error (non-convergence): " << e.what() << "\n";
    return 2;
  } catch (const curvlab::IoError& e) {
    std::cerr << "error (I/O): " << e.what() << "\n";
    return 3;
  }
}
