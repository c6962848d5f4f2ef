#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "wavectrl/error.hpp"

int main(int argc, char** argv) {
  using namespace wavectrl;
  using namespace wavectrl::app;

  CLI::App cli{"Spacetime finite element null control of the 1D wave equation"};
  cli.require_subcommand(1);
  Options options;
  const auto add_common = [&options](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", options.config, "JSON run configuration");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", options.out_dir, "Output directory");
    sub->add_option("--threads", options.threads, "Worker threads for studies")->check(CLI::PositiveNumber);
  };
  auto* solve_cmd = cli.add_subcommand("solve", "Solve one configuration and write the solution");
  auto* study_cmd = cli.add_subcommand("study", "Convergence study: CSV and SVG");
  auto* exact_cmd = cli.add_subcommand("validate-exact", "Check closed-form norms");
  add_common(solve_cmd, true);
  add_common(study_cmd, true);
  add_common(exact_cmd, false);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("usage", e.what()) << '\n';
    return kConfigError;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(options, std::cout);
    if (study_cmd->parsed()) return cmd_study(options, std::cout);
    return cmd_validate_exact(std::cout);
  } catch (const InvalidArgument& e) {
    std::cerr << error_json("config", e.what()) << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << error_json("solver", e.what()) << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()) << '\n';
    return kFailure;
  }
}
