// koopgal: Koopman/Galerkin solver for polynomial ODEs.
//
//   koopgal solve    --config duffing.json [--reference] [--rk-step 1e-4] [--out-dir out]
//   koopgal sweep    --config duffing.json --orders 1..7 [--rk-step 1e-4] [--out-dir out]
//   koopgal validate

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <koopgal/app.hpp>
#include <koopgal/validate.hpp>

int main(int argc, char **argv) {
  CLI::App app{"Spectral solution of polynomial ODEs via a Galerkin Koopman matrix"};
  app.require_subcommand(1);

  koopgal::SolveOptions opts;
  std::string config;
  std::string out_dir = "out";
  std::string orders = "1..7";

  auto *solve = app.add_subcommand("solve", "Solve one system and write trajectory CSV + summary JSON");
  solve->add_option("--config", config, "System config (JSON)")->required();
  solve->add_flag("--reference", opts.reference, "Also integrate with RK4 and report errors");
  solve->add_option("--rk-step", opts.rk_step, "RK4 step size")->capture_default_str();
  solve->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  auto *sweep = app.add_subcommand("sweep", "Solve over a range of orders against one RK4 reference");
  sweep->add_option("--config", config, "System config (JSON)")->required();
  sweep->add_option("--orders", orders, "Orders as A..B or a comma list")->capture_default_str();
  sweep->add_option("--rk-step", opts.rk_step, "RK4 step size")->capture_default_str();
  sweep->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  app.add_subcommand("validate", "Run the built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : koopgal::kExitConfig;
  }
  opts.out_dir = out_dir;

  if (solve->parsed())
    return koopgal::run_solve(config, opts, std::cout, std::cerr);
  if (sweep->parsed()) {
    std::vector<int> list;
    try {
      list = koopgal::parse_orders(orders);
    } catch (const koopgal::ValidationError &e) {
      std::cerr << "config error: " << e.what() << '\n';
      return koopgal::kExitConfig;
    }
    return koopgal::run_sweep(config, list, opts, std::cout, std::cerr);
  }
  return koopgal::run_validate(std::cout);
}
