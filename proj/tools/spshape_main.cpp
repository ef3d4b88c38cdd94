// spshape command line: thin wrapper over the C API run layer.
#include <CLI11.hpp>

#include <cstdio>

#include "spshape.h"

int main(int argc, char** argv) {
  CLI::App app{"spshape - multiphase spectral shape optimization"};
  app.require_subcommand(1);

  std::string config, outdir;
  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config, "JSON run configuration")->required();
    sub->add_option("-o,--output", outdir, "output directory (overrides the config)");
    return sub;
  };
  add("solve", "single torsion/eigenvalue solve on a support");
  add("optimize", "projected-gradient multiphase optimization");
  add("verify", "theory checks on a prior optimize output");
  add("monotonicity", "monotonicity-formula profiles on analytic or file fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  const int code = sps_run(sub.c_str(), config.c_str(), outdir.empty() ? nullptr : outdir.c_str());
  if (code != 0) std::fprintf(stderr, "spshape %s: %s\n", sub.c_str(), sps_last_error());
  return code;
}
