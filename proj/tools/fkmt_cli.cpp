#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fkmt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multitransition solutions of generalized Frenkel-Kontorova lattices"};
  app.require_subcommand(1);

  std::string path;
  auto* gap = app.add_subcommand("gap", "find the adjacent minimizing constants v0 < w0");
  gap->add_option("config", path, "config file")->required();
  auto* solve = app.add_subcommand("solve", "run the full pipeline and write an archive");
  solve->add_option("config", path, "config file")->required();
  auto* verify = app.add_subcommand("verify", "recompute diagnostics of a stored archive");
  verify->add_option("archive", path, "archive.json")->required();
  auto* sweep = app.add_subcommand("sweep", "solve every cell of the [grid] block");
  sweep->add_option("config", path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : fkmt::kExitInvalid;
  }

  try {
    if (*gap) return fkmt::cmd_gap(path, std::cout, std::cerr);
    if (*solve) return fkmt::cmd_solve(path, std::cout, std::cerr);
    if (*verify) return fkmt::cmd_verify(path, std::cout, std::cerr);
    return fkmt::cmd_sweep(path, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fkmt::kExitInvalid;
  }
}
