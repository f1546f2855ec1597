#include <CLI11.hpp>

#include <cstdio>

#include "cw/trees.hpp"

// Placeholder entry point; subcommands are filled in as the modules land.
int main(int argc, char** argv) {
  CLI::App app{"curved A-infinity / combinatorial Chern-Weil toolkit"};
  app.require_subcommand(0, 1);

  int trees_degree = 4;
  auto* trees_cmd = app.add_subcommand("trees", "enumerate completely even trees");
  trees_cmd->add_option("--degree", trees_degree, "even degree of the trees");

  CLI11_PARSE(app, argc, argv);

  if (trees_cmd->parsed()) {
    for (auto& t : cw::enum_cet(trees_degree)) std::printf("%s\n", t.bracket().c_str());
    return 0;
  }
  std::printf("%s\n", app.help().c_str());
  return 0;
}
