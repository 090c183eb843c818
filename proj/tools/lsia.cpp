#include <iostream>

#include <CLI11.hpp>

#include "lsia/cli.hpp"

int main(int argc, char** argv) {
  lsia::cli::RunConfig cfg;
  auto& p = cfg.params;
  double time_limit = *p.time_limit;
  std::uint64_t max_steps = 0;
  std::string variant = "default";
  std::string trace;

  CLI::App app{"Local-search solver for quantifier-free integer arithmetic (SMT-LIB2 input)"};
  app.add_option("input", cfg.input, "SMT-LIB2 file")->required();
  app.add_option("--seed", p.seed, "random seed")->capture_default_str();
  app.add_option("--time-limit", time_limit, "seconds, 0 for none")->capture_default_str();
  app.add_option("--max-steps", max_steps, "step limit, 0 for none");
  app.add_option("--L", p.L, "mode switch scale")->capture_default_str();
  app.add_option("--t", p.t, "BMS sample count")->capture_default_str();
  app.add_option("--tt-base", p.tt_base, "fixed part of the tabu tenure")->capture_default_str();
  app.add_option("--tt-rand", p.tt_rand, "random part of the tabu tenure")->capture_default_str();
  app.add_option("--max-no-improve", p.max_no_improve, "restart threshold")->capture_default_str();
  app.add_option("--sp", p.sp, "smoothing probability")->capture_default_str();
  app.add_option("--variant", variant, "default, fix_1, fix_5, focused, extended, score_only")
      ->capture_default_str();
  app.add_option("--portfolio", cfg.portfolio, "parallel engines with consecutive seeds")
      ->capture_default_str();
  app.add_option("--trace", trace, "write the step trace to this file");
  app.add_flag("--validate,!--no-validate", cfg.validate, "check sat models against the input");
  app.add_flag("--stats", cfg.stats, "print search statistics to stderr");
  app.add_flag("!--no-gcd-reduce", cfg.gcd_reduce, "keep atom coefficients unreduced");
  app.add_flag("--debug-corrupt-model", cfg.corrupt_model)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : lsia::cli::kExitError;
  }

  auto v = lsia::parse_variant(variant);
  if (!v) {
    std::cerr << "error: unknown variant " << variant << "\n";
    return lsia::cli::kExitError;
  }
  p.variant = *v;
  p.time_limit = time_limit > 0 ? std::optional<double>(time_limit) : std::nullopt;
  if (max_steps > 0) p.max_steps = max_steps;
  if (!trace.empty()) cfg.trace_path = trace;
  return lsia::cli::run(cfg, std::cout, std::cerr);
}
