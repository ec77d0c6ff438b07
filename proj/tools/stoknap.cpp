// Command-line surface for the stochastic knapsack pipeline: instance
// generation, the continuous-greedy solve, policy simulation, the
// verification suites, and single-trace dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stoknap/cgreedy.hpp"
#include "stoknap/gen.hpp"
#include "stoknap/io.hpp"
#include "stoknap/rng.hpp"
#include "stoknap/rounding.hpp"
#include "stoknap/suites.hpp"
#include "stoknap/verify.hpp"

using namespace stoknap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitVerifyFailure = 2;

// --seed wins; STOKNAP_SEED fills in; stochastic commands refuse to run
// without one.
std::optional<uint64_t> resolve_seed(const std::optional<uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("STOKNAP_SEED")) return std::stoull(env);
  return std::nullopt;
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  return file;
}

Instance load_checked(const std::string& path) {
  Instance instance = read_instance_file(path);
  const auto violations = validate_instance(instance);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid instance " << path << ":";
    for (const auto& v : violations) os << "\n  " << v.subject << ": " << v.message;
    throw std::runtime_error(os.str());
  }
  return instance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlated stochastic knapsack solver and verification toolkit"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a random or spot-scheduling instance");
  std::string gen_family = "random";
  gen->add_option("--family", gen_family, "random|spot")
      ->check(CLI::IsMember({"random", "spot"}));
  RandomInstanceParams rparams;
  SpotInstanceParams sparams;
  gen->add_option("--n-base", rparams.n_base, "base items (random family)")
      ->check(CLI::Range(1, 6));
  gen->add_option("--jobs", sparams.n_jobs, "jobs (spot family)")->check(CLI::Range(1, 4));
  gen->add_option("--instances", sparams.n_instances, "spot instances (spot family)")
      ->check(CLI::Range(1, 4));
  int gen_budget = 4, gen_reward_bound = 2;
  gen->add_option("--budget", gen_budget, "time-slot budget B")->check(CLI::Range(1, 12));
  gen->add_option("--reward-bound", gen_reward_bound, "reward bound M")->check(CLI::Range(1, 4));
  gen->add_option("--max-support", rparams.max_support, "support points per item")
      ->check(CLI::Range(1, 6));
  std::string gen_objective = "rotate";
  gen->add_option("--objective", gen_objective, "additive|concave|coverage|rotate")
      ->check(CLI::IsMember({"additive", "concave", "coverage", "rotate"}));
  std::optional<uint64_t> gen_seed;
  gen->add_option("--seed", gen_seed, "generator seed (or STOKNAP_SEED)");
  std::string gen_out = "-";
  gen->add_option("--out,-o", gen_out, "output instance file (default stdout)");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "run the continuous greedy and write a solution");
  std::string solve_instance;
  solve->add_option("--instance,-i", solve_instance, "instance file")->required();
  std::string solve_out = "-";
  solve->add_option("--out,-o", solve_out, "solution file (default stdout)");
  GreedyConfig greedy_config;
  solve->add_option("--b", greedy_config.stopping_time, "stopping time in (0,1]");
  solve->add_option("--delta", greedy_config.step, "step size (0 = default)");
  solve->add_option("--samples", greedy_config.samples_per_weight, "samples per weight");
  bool solve_exact = false;
  solve->add_flag("--exact-marginals", solve_exact, "exact marginal weights (small n)");
  std::optional<uint64_t> solve_seed;
  solve->add_option("--seed", solve_seed, "seed (or STOKNAP_SEED)");
  bool solve_with_dp = false;
  solve->add_flag("--with-dp", solve_with_dp, "also compute the DP optimum for the report");
  std::string solve_report;
  solve->add_option("--report", solve_report, "quality report CSV path");
  std::string solve_dump_lp;
  solve->add_option("--dump-lp", solve_dump_lp, "dump the constraint system in LP format");
  bool solve_include_mid = false;
  solve->add_flag("--include-mid", solve_include_mid, "include transient values in the solution");

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "estimate f_avg of the rounded policy");
  std::string sim_instance, sim_solution;
  simulate->add_option("--instance,-i", sim_instance, "instance file")->required();
  simulate->add_option("--solution,-s", sim_solution, "solution file")->required();
  size_t sim_runs = 100000;
  simulate->add_option("--runs", sim_runs, "simulation runs");
  std::optional<uint64_t> sim_seed;
  simulate->add_option("--seed", sim_seed, "seed (or STOKNAP_SEED)");
  unsigned sim_threads = 1;
  simulate->add_option("--threads", sim_threads, "worker threads");
  std::string sim_out = "-";
  simulate->add_option("--out,-o", sim_out, "f_avg CSV (default stdout)");

  // ---- verify ----
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string ver_instance;
  verify->add_option("--instance,-i", ver_instance, "instance file")->required();
  std::string ver_suite;
  verify->add_option("--suite", ver_suite, "crs|mono|polytope|multilinear|dp-ratio")
      ->required()
      ->check(CLI::IsMember({"crs", "mono", "polytope", "multilinear", "dp-ratio"}));
  SuiteConfig suite_config;
  std::optional<uint64_t> ver_seed;
  verify->add_option("--seed", ver_seed, "seed (or STOKNAP_SEED)");
  verify->add_option("--runs", suite_config.crs_runs, "runs for the crs suite");
  verify->add_option("--favg-runs", suite_config.favg_runs, "runs for the dp-ratio suite");
  verify->add_option("--mono-pairs", suite_config.mono_pairs, "profile pairs for mono");
  verify->add_option("--mono-trials", suite_config.mono_trials, "trials per profile");
  verify->add_option("--threads", suite_config.threads, "worker threads");
  verify->add_option("--delta", suite_config.greedy.step, "greedy step (0 = default)");
  verify->add_option("--samples", suite_config.greedy.samples_per_weight,
                     "greedy samples per weight");
  std::string ver_out = "-";
  verify->add_option("--out,-o", ver_out, "report CSV (default stdout)");

  // ---- trace ----
  auto* trace_cmd = app.add_subcommand("trace", "dump one execution trace");
  std::string trace_instance, trace_solution;
  trace_cmd->add_option("--instance,-i", trace_instance, "instance file")->required();
  trace_cmd->add_option("--solution,-s", trace_solution, "solution file")->required();
  std::optional<uint64_t> trace_seed;
  trace_cmd->add_option("--seed", trace_seed, "seed (or STOKNAP_SEED)");
  std::string trace_out = "-";
  trace_cmd->add_option("--out,-o", trace_out, "trace CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto seed = resolve_seed(gen_seed);
      if (!seed) throw std::runtime_error("gen is stochastic: pass --seed or set STOKNAP_SEED");
      Instance instance;
      if (gen_family == "random") {
        rparams.budget = gen_budget;
        rparams.reward_bound = gen_reward_bound;
        if (gen_objective == "additive") rparams.objective = ObjectiveKind::kAdditive;
        if (gen_objective == "concave") rparams.objective = ObjectiveKind::kConcaveOfSum;
        if (gen_objective == "coverage") rparams.objective = ObjectiveKind::kNestedCoverage;
        instance = generate_random_instance(rparams, *seed);
      } else {
        sparams.budget = gen_budget;
        sparams.reward_bound = gen_reward_bound;
        instance = generate_spot_instance(sparams, *seed);
      }
      std::ofstream file;
      write_instance_json(instance, open_or_stdout(file, gen_out));
      return kExitOk;
    }

    if (solve->parsed()) {
      const auto seed = resolve_seed(solve_seed);
      if (!seed && !solve_exact)
        throw std::runtime_error("solve is stochastic: pass --seed or set STOKNAP_SEED");
      const Instance instance = load_checked(solve_instance);
      const auto system = ConstraintSystem::build(instance);
      greedy_config.exact_marginals = solve_exact;
      greedy_config.seed = seed.value_or(0);
      if (!solve_dump_lp.empty()) {
        std::ofstream lp(solve_dump_lp);
        if (!lp) throw std::runtime_error("cannot open for writing: " + solve_dump_lp);
        write_lp_format(system, std::vector<double>(instance.item_count(), 1.0), lp);
      }
      const GreedyResult result = continuous_greedy(instance, system, greedy_config);
      std::ofstream file;
      write_solution_json(system, result.solution,
                          {greedy_config.stopping_time,
                           greedy_config.effective_step(instance.item_count()),
                           greedy_config.seed},
                          open_or_stdout(file, solve_out), solve_include_mid);

      std::optional<double> opt;
      if (solve_with_dp) opt = optimal_adaptive_dp(instance).value;
      const QualityReport report = greedy_quality_report(
          instance, system, result.solution, opt, greedy_config.samples_per_weight,
          derive_seed(greedy_config.seed, 0x9));
      std::ostream& log = std::cerr;
      log << "# F_bar " << (report.fbar_exact ? "(exact) " : "(sampled) ") << report.fbar;
      if (!report.fbar_exact) log << " +- " << report.fbar_stderr;
      if (report.opt) log << "; OPT " << *report.opt;
      if (report.ratio) log << "; F_bar/OPT " << *report.ratio;
      log << "; lp solves " << result.lp_solves << '\n';
      for (const auto& notice : result.notices) log << "# notice: " << notice << '\n';
      for (const auto& notice : report.notices) log << "# notice: " << notice << '\n';
      if (!solve_report.empty()) {
        std::ofstream rep(solve_report);
        if (!rep) throw std::runtime_error("cannot open for writing: " + solve_report);
        rep << "iteration,weight_norm,objective_estimate\n";
        for (const auto& row : result.trace)
          rep << row.iteration << ',' << row.weight_norm << ',' << row.objective_estimate
              << '\n';
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      const auto seed = resolve_seed(sim_seed);
      if (!seed) throw std::runtime_error("simulate is stochastic: pass --seed or set STOKNAP_SEED");
      const Instance instance = load_checked(sim_instance);
      const auto system = ConstraintSystem::build(instance);
      const FractionalSolution solution = read_solution_file(system, sim_solution);
      const Estimate favg =
          simulate_favg(instance, system, solution, sim_runs, *seed, sim_threads);
      std::ofstream file;
      std::ostream& os = open_or_stdout(file, sim_out);
      os << "metric,value\n";
      os << "favg_mean," << favg.mean << '\n';
      os << "favg_stderr," << favg.stderr_mean << '\n';
      os << "runs," << favg.samples << '\n';
      return kExitOk;
    }

    if (verify->parsed()) {
      const auto seed = resolve_seed(ver_seed);
      if (!seed) throw std::runtime_error("verify is stochastic: pass --seed or set STOKNAP_SEED");
      suite_config.seed = *seed;
      const Instance instance = load_checked(ver_instance);
      SuiteResult result;
      if (ver_suite == "crs") result = suite_crs(instance, ver_instance, suite_config);
      if (ver_suite == "mono") result = suite_monotonicity(instance, ver_instance, suite_config);
      if (ver_suite == "polytope") result = suite_polytope(instance, ver_instance, suite_config);
      if (ver_suite == "multilinear")
        result = suite_multilinear(instance, ver_instance, suite_config);
      if (ver_suite == "dp-ratio") result = suite_dp_ratio(instance, ver_instance, suite_config);
      std::ofstream file;
      write_report_csv(open_or_stdout(file, ver_out), result.rows);
      if (result.audit.runs > 0 && result.audit.total() > 0) {
        std::cerr << "# execution feasibility violations: " << result.audit.total() << " in "
                  << result.audit.runs << " runs\n";
        return kExitVerifyFailure;
      }
      return result.all_passed() ? kExitOk : kExitVerifyFailure;
    }

    if (trace_cmd->parsed()) {
      const auto seed = resolve_seed(trace_seed);
      if (!seed) throw std::runtime_error("trace is stochastic: pass --seed or set STOKNAP_SEED");
      const Instance instance = load_checked(trace_instance);
      const auto system = ConstraintSystem::build(instance);
      const FractionalSolution solution = read_solution_file(system, trace_solution);
      const ExecutionTrace trace = run_policy_once(instance, system, solution, *seed);
      std::ofstream file;
      std::ostream& os = open_or_stdout(file, trace_out);
      os << "item,t,status,cause,blocker_item,blocker_t,size,reward\n";
      for (const auto& outcome : trace.outcomes) {
        os << instance.items[outcome.proposal.item].id << ',' << outcome.proposal.t << ','
           << (outcome.real ? "real" : "phantom") << ',' << to_string(outcome.cause) << ',';
        if (outcome.blocker >= 0) {
          const auto& blocker = trace.outcomes[outcome.blocker].proposal;
          os << instance.items[blocker.item].id << ',' << blocker.t;
        } else {
          os << ',';
        }
        os << ',' << outcome.size << ',' << outcome.reward << '\n';
      }
      os << "# objective," << trace.objective << '\n';
      return kExitOk;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}
