#include "cli_main.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairalloc/bench.hpp"

namespace {

using namespace fairalloc;

struct CliOptions {
  std::string dist_path;
  std::vector<std::string> policies{"f"};
  std::vector<std::string> qs{"-inf"};
  std::vector<int64_t> Ts;
  int64_t reps = 0;  // 0 = desk-scale default per T
  uint64_t seed = 0;
  double eta = 1.05;
  int threads = 0;  // 0 = all hardware threads
  std::string out_path;
  int instances = 30;
  int agents = 4;
  int types = 5;
  double alpha = 2.0;
  double beta = 2.0;
};

ExperimentConfig to_config(const CliOptions& o) {
  if (o.Ts.empty()) throw std::invalid_argument("--T: need at least one horizon");
  for (size_t i = 0; i < o.Ts.size(); ++i) {
    if (o.Ts[i] < 1) throw std::invalid_argument("--T: horizons must be >= 1");
    if (i && o.Ts[i] <= o.Ts[i - 1])
      throw std::invalid_argument("--T: horizons must be strictly ascending");
  }
  if (o.reps != 0 && o.reps < 2)
    throw std::invalid_argument("--reps: need at least 2 replications (0 = default)");
  ExperimentConfig cfg;
  for (const std::string& tok : o.policies) cfg.kinds.push_back(parse_policy(tok));
  for (const std::string& tok : o.qs) cfg.qs.push_back(WelfareParam::parse(tok));
  cfg.Ts = o.Ts;
  cfg.reps = o.reps;
  cfg.master_seed = o.seed;
  cfg.eta = o.eta;
  cfg.instances = o.instances;
  cfg.agents = o.agents;
  cfg.types = o.types;
  cfg.alpha = o.alpha;
  cfg.beta = o.beta;
  cfg.run.threads = o.threads;
  return cfg;
}

// Streams rows to the CSV as they finish and drops the manifest next to it.
void with_csv(const std::string& out_path, const ExperimentConfig& cfg,
              const std::string& command_line,
              const std::function<void(const RowSink&)>& body) {
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  out << csv_header() << '\n';
  int64_t rows = 0;
  body([&](const ResultRow& row) {
    out << csv_row(row) << '\n';
    out.flush();
    ++rows;
  });
  if (!out) throw std::runtime_error("write failure on '" + out_path + "'");
  write_manifest(out_path, cfg, command_line);
  std::cout << "wrote " << rows << " rows to " << out_path << "\n";
}

void add_grid_options(CLI::App* cmd, CliOptions& o, bool need_T) {
  cmd->add_option("--policy", o.policies, "comma-separated list of f, fr, bir, birt")
      ->delimiter(',');
  cmd->add_option("--q", o.qs,
                  "comma-separated welfare exponents in [-inf, 1]; -inf = egalitarian")
      ->delimiter(',');
  auto* T = cmd->add_option("--T", o.Ts, "comma-separated horizons")->delimiter(',');
  if (need_T) T->required();
  cmd->add_option("--reps", o.reps, "Monte Carlo replications per point (0 = default per T)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--eta", o.eta, "re-solve schedule growth rate (> 1)");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", o.out_path, "output CSV path")->required();
}

std::string join_args(int argc, const char* const* argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) {
    if (i) os << ' ';
    os << argv[i];
  }
  return os.str();
}

}  // namespace

int fairalloc_cli_main(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo benchmark for sequential fair-division policies"};
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  CliOptions sim_opt;
  CLI::App* sim = app.add_subcommand(
      "simulate", "run the policy grid on a distribution loaded from JSON");
  sim->add_option("--dist", sim_opt.dist_path, "arrival distribution JSON file")->required();
  add_grid_options(sim, sim_opt, /*need_T=*/true);
  sim->callback([&] {
    const ArrivalDistribution dist = ArrivalDistribution::load(sim_opt.dist_path);
    const ExperimentConfig cfg = to_config(sim_opt);
    const std::string instance = std::filesystem::path(sim_opt.dist_path).stem().string();
    with_csv(sim_opt.out_path, cfg, command_line, [&](const RowSink& sink) {
      run_single(dist, cfg, "single", instance, sink);
    });
  });

  CLI::App* exp = app.add_subcommand("experiment", "built-in experiment suites");
  exp->require_subcommand(1);

  CliOptions rnd_opt;
  CLI::App* rnd = exp->add_subcommand(
      "randomized", "random instances: Beta(alpha, beta) support, uniform simplex probs");
  rnd->add_option("--instances", rnd_opt.instances, "number of random instances")
      ->check(CLI::PositiveNumber);
  rnd->add_option("--n", rnd_opt.agents, "agents per instance")->check(CLI::PositiveNumber);
  rnd->add_option("--L", rnd_opt.types, "types per instance")->check(CLI::PositiveNumber);
  rnd->add_option("--alpha", rnd_opt.alpha, "Beta shape alpha")->check(CLI::PositiveNumber);
  rnd->add_option("--beta", rnd_opt.beta, "Beta shape beta")->check(CLI::PositiveNumber);
  add_grid_options(rnd, rnd_opt, /*need_T=*/true);
  rnd->callback([&] {
    const ExperimentConfig cfg = to_config(rnd_opt);
    with_csv(rnd_opt.out_path, cfg, command_line,
             [&](const RowSink& sink) { run_randomized(cfg, sink); });
  });

  CliOptions spc_opt;
  spc_opt.policies = {"f", "fr", "bir", "birt"};
  spc_opt.Ts = {16, 64, 256, 1024, 4096, 16384, 65536};
  CLI::App* spc = exp->add_subcommand(
      "special", "the two built-in 2x2 instances (degenerate and nondegenerate)");
  add_grid_options(spc, spc_opt, /*need_T=*/false);
  spc->callback([&] {
    const ExperimentConfig cfg = to_config(spc_opt);
    with_csv(spc_opt.out_path, cfg, command_line,
             [&](const RowSink& sink) { run_special(cfg, sink); });
  });

  int64_t sched_T = 0;
  double sched_eta = 1.05;
  int sched_n = 2;
  CLI::App* sched = app.add_subcommand("schedule", "print a re-solve schedule");
  sched->add_option("--T", sched_T, "horizon")->required()->check(CLI::PositiveNumber);
  sched->add_option("--eta", sched_eta, "growth rate (> 1)");
  sched->add_option("--n", sched_n, "agents (sets the threshold denominator)")
      ->check(CLI::PositiveNumber);
  sched->callback(
      [&] { std::cout << schedule_report(make_schedule(sched_T, sched_eta, sched_n)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
