#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pha/cli.hpp"

namespace {

void add_stop_flags(CLI::App* cmd, pha::cli::StopFlags& stop) {
  cmd->add_option("--epsilon", stop.epsilon, "stop once P_Q <= epsilon * P_D");
  cmd->add_option("--max-explanations", stop.max_explanations, "stop after this many explanations");
  cmd->add_option("--max-expansions", stop.max_expansions, "stop after this many queue pops");
  cmd->add_flag("--keep-zero", stop.keep_zero, "keep partial explanations with prior 0");
}

const std::map<std::string, pha::cli::Format> formats {
    {"table", pha::cli::Format::table},
    {"json", pha::cli::Format::json},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app {"Probabilistic Horn abduction: best-first explanations, anytime bounds, "
                "and Bayesian network compilation"};
  app.require_subcommand(1);

  pha::cli::CompileArgs compile_args;
  auto* compile = app.add_subcommand("compile-bn", "translate a Bayesian network (JSON) into a .pha program");
  compile->add_option("input", compile_args.input, "network file, or - for stdin")->required();
  compile->add_option("-o,--output", compile_args.output, "output .pha file (default stdout)");
  compile->add_flag("--paper-exact", compile_args.paper_exact, "emit exclusivity constraints in both orders");
  compile->add_flag("--c-constraints", compile_args.c_constraints,
                    "also emit exclusivity constraints between c_ hypotheses of one parent context");
  bool no_sidecar = false;
  compile->add_flag("--no-sidecar", no_sidecar, "do not write <output>.domains.json");

  pha::cli::ExplainArgs explain_args;
  auto* explain = app.add_subcommand("explain", "enumerate explanations of a ground conjunction best-first");
  explain->add_option("kb", explain_args.kb, ".pha file, or - for stdin")->required();
  explain->add_option("query", explain_args.query, "ground conjunction, e.g. \"smoke(yes), report(yes)\"")
      ->required();
  add_stop_flags(explain, explain_args.stop);
  explain->add_option("--format", explain_args.format, "table or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  explain->add_flag("--trace", explain_args.trace, "print expansions, P_D and P_Q per step to stderr");

  pha::cli::PosteriorArgs posterior_args;
  auto* posterior = app.add_subcommand("posterior", "posterior distribution of a variable given observations");
  posterior->add_option("kb", posterior_args.kb, ".pha file")->required();
  posterior->add_option("--var", posterior_args.variable, "variable (predicate) name")->required();
  posterior->add_option("--obs", posterior_args.observation, "observed ground conjunction");
  posterior->add_option("--values", posterior_args.values, "value domain of the variable")->delimiter(',');
  posterior->add_option("--domains", posterior_args.domains, "domains sidecar (default <kb>.domains.json)");
  add_stop_flags(posterior, posterior_args.stop);
  posterior->add_option("--format", posterior_args.format, "table or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  pha::cli::CheckArgs check_args;
  auto* check = app.add_subcommand("check", "compare engine results with brute-force network inference");
  check->add_option("bn", check_args.bn, "network file")->required();
  check->add_option("--kb", check_args.kb, "compiled program to check (default: compile the network)");
  check->add_option("--tolerance", check_args.tolerance, "maximum absolute difference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? pha::cli::exit_ok : pha::cli::exit_io;
  }

  if (*compile) {
    compile_args.sidecar = !no_sidecar;
    return pha::cli::cmd_compile_bn(compile_args, std::cout, std::cerr);
  }
  if (*explain) return pha::cli::cmd_explain(explain_args, std::cout, std::cerr);
  if (*posterior) return pha::cli::cmd_posterior(posterior_args, std::cout, std::cerr);
  return pha::cli::cmd_check(check_args, std::cout, std::cerr);
}
