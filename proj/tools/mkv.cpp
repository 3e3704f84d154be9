#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "mkv/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"McKean-Vlasov SDEs with distributional interaction kernels"};
  app.require_subcommand(1);
  mkv::RunOptions opt;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "experiment config file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (overrides [output] dir)");
    sub->add_flag("--strict", opt.strict, "exit 3 when the checked conditions fail");
    sub->add_flag("--force", opt.force, "run the solver even when the conditions fail");
    sub->add_option("--seed", seed, "override [particles] seed");
  };

  common(app.add_subcommand("check", "evaluate the well-posedness conditions"), true);
  common(app.add_subcommand("fp-solve", "solve the mollified nonlinear Fokker-Planck equation"), true);
  common(app.add_subcommand("particles", "simulate the interacting particle system"), true);
  common(app.add_subcommand("kernels", "write b and div b on the grid"), true);

  auto* besov = app.add_subcommand("besov", "thermic Besov norm of a field CSV");
  common(besov, false);
  besov->add_option("--field", opt.field, "scalar field CSV")->required()->check(CLI::ExistingFile);
  besov->add_option("--gamma", opt.gamma, "regularity index");
  besov->add_option("--ell", opt.ell, "integrability index (inf allowed)");
  besov->add_option("--m", opt.m, "summability index (inf allowed)");

  auto* compare = app.add_subcommand("compare", "L1 and sup distance between two field CSVs");
  common(compare, false);
  compare->add_option("--lhs", opt.lhs, "first field CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--rhs", opt.rhs, "second field CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mkv::kExitInput;
  }
  for (const auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opt.seed = seed;
    return mkv::run(sub->get_name(), opt, std::cout, std::cerr);
  }
  return mkv::kExitInput;
}
