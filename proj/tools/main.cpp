#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symsynth/cli.hpp"

using namespace symsynth;

int main(int argc, char** argv) {
  CLI::App app{"strategy synthesis for human-robot manipulation games"};
  app.require_subcommand(1);

  cli::RunConfig rc;
  std::string solver = "symbolic-monolithic";
  std::string objective = "minmax";
  int64_t budget = 0;

  auto* synth = app.add_subcommand(
      "synth", "solve one instance; writes strategy.json and report.json");
  synth->add_option("--instance", rc.instance_path, "instance JSON file");
  synth->add_option("--pddl-domain", rc.pddl_domain, "PDDL domain file");
  synth->add_option("--pddl-problem", rc.pddl_problem, "PDDL problem file");
  synth->add_option("--caps", rc.caps_path,
                    "sidecar JSON: human capabilities and action costs");
  synth->add_option("--formula", rc.formula,
                    "LTLf task, literal text or a file path");
  synth->add_option("--solver", solver, "pipeline to run")
      ->check(CLI::IsMember(
          {"explicit", "symbolic-monolithic", "symbolic-partitioned"}));
  synth->add_option("--objective", objective, "minmax or regret")
      ->check(CLI::IsMember({"minmax", "regret"}));
  auto* bopt =
      synth->add_option("--budget", budget, "payoff budget for regret")
          ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", rc.seed, "run seed, echoed in reports");
  synth->add_option("--out", rc.out_dir, "output directory");
  synth->add_option("--max-states", rc.max_states,
                    "explicit-representation refusal cap");
  synth->add_option("--max-vars", rc.max_vars, "decision-variable refusal cap");

  cli::TranslateConfig tc;
  auto* translate = app.add_subcommand(
      "translate", "compile an LTLf formula; writes dfa.dot and dfa.json");
  translate->add_option("--formula", tc.formula, "LTLf text or a file path")
      ->required();
  translate->add_option("--out", tc.out_dir, "output directory");

  cli::BenchConfig bc;
  std::string solvers_csv = "explicit,symbolic-monolithic,symbolic-partitioned";
  std::string seeds_csv = "0";
  uint32_t fix_l = 0, fix_o = 0;
  auto* bench = app.add_subcommand(
      "bench", "sweep generated instances; writes bench.jsonl and bench.csv");
  bench->add_option("--scenario", bc.scenario, "vary-L, vary-O, or vary-B")
      ->required()
      ->check(CLI::IsMember({"vary-L", "vary-O", "vary-B"}));
  bench->add_option("--min", bc.lo, "first parameter value")->required();
  bench->add_option("--max", bc.hi, "last parameter value")->required();
  bench->add_option("--solvers", solvers_csv, "comma-separated pipelines");
  bench->add_option("--seeds", seeds_csv, "comma-separated instance seeds");
  auto* lopt =
      bench->add_option("--locations", fix_l, "fixed location count");
  auto* oopt = bench->add_option("--objects", fix_o, "fixed object count");
  bench->add_option("--out", bc.out_dir, "output directory");
  bench->add_option("--max-states", bc.max_states,
                    "explicit-representation refusal cap");
  bench->add_option("--max-vars", bc.max_vars, "decision-variable refusal cap");

  cli::RolloutConfig oc;
  auto* rollout = app.add_subcommand(
      "rollout", "replay a strategy artifact; writes transcripts.json");
  rollout->add_option("--strategy", oc.strategy_path, "strategy artifact path")
      ->required();
  rollout->add_option("--human", oc.human,
                      "adversarial, cooperative, random[:seed], or script:FILE");
  rollout->add_option("-n,--count", oc.count, "number of transcripts");
  rollout->add_option("--seed", oc.seed, "base seed for the random human");
  rollout->add_option("--out", oc.out_dir, "output directory");
  rollout->add_option("--max-steps", oc.max_steps, "per-transcript step cap");
  rollout->add_option("--max-states", oc.max_states,
                      "explicit-representation refusal cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      rc.solver = cli::solver_from_name(solver);
      rc.objective = cli::objective_from_name(objective);
      if (bopt->count() > 0) rc.budget = budget;
      return cli::run_synth(rc, std::cout);
    }
    if (translate->parsed()) return cli::run_translate(tc, std::cout);
    if (bench->parsed()) {
      bc.solvers.clear();
      for (const auto& s : cli::detail::split_csv(solvers_csv))
        bc.solvers.push_back(cli::solver_from_name(s));
      bc.seeds.clear();
      for (const auto& s : cli::detail::split_csv(seeds_csv))
        bc.seeds.push_back(std::stoull(s));
      if (lopt->count() > 0) bc.locations = fix_l;
      if (oopt->count() > 0) bc.objects = fix_o;
      return cli::run_bench(bc, std::cout);
    }
    if (rollout->parsed()) return cli::run_rollout(oc, std::cout);
  } catch (const cli::CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kFailure;
  }
  return cli::kFailure;
}
