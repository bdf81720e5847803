#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fairalloc/simulator.hpp"

namespace fairalloc {

// One CSV line of benchmark output.
struct ResultRow {
  std::string experiment;  // single | randomized | special
  std::string instance;    // index, instance name, or "mean" for summaries
  std::string policy;      // f | fr | bir | birt
  WelfareParam q = WelfareParam::egalitarian();
  double eta = 0.0;
  int64_t T = 0;
  int64_t reps = 0;
  double mean_alg = 0.0;
  double mean_opt = 0.0;
  double regret = 0.0;
  double regret_stderr = 0.0;
  double rel_regret = 0.0;
  double flu_value = 0.0;
  bool degenerate = false;
  double wall_time_ms = 0.0;
};

std::string csv_header();
std::string csv_row(const ResultRow& row);               // 17 significant digits
std::vector<ResultRow> read_csv(const std::string& path);

struct ExperimentConfig {
  std::vector<PolicyKind> kinds;
  std::vector<WelfareParam> qs;
  std::vector<int64_t> Ts;
  int64_t reps = 0;  // 0 = desk-scale default per T
  uint64_t master_seed = 0;
  double eta = 1.05;
  // randomized experiment only
  int instances = 30;
  int agents = 4;
  int types = 5;
  double alpha = 2.0;
  double beta = 2.0;
  SolverConfig solver;
  RunOptions run;
};

inline int64_t default_reps(int64_t T) { return T <= 4096 ? 2000 : 500; }

using RowSink = std::function<void(const ResultRow&)>;

// Full (policy x q x T) grid on one distribution; rows stream to the sink as
// they finish.  Every row also carries the fluid value for its (q, T) and the
// degeneracy flag of the instance's time-zero egalitarian LP.
void run_single(const ArrivalDistribution& dist, const ExperimentConfig& cfg,
                const std::string& experiment, const std::string& instance,
                const RowSink& sink);

// Draws config.instances random instances (probabilities uniform on the
// simplex, support entries iid Beta(alpha, beta)), runs the grid on each, and
// appends per-(policy, q, T) "mean" rows whose rel_regret is the arithmetic
// mean of the per-instance values.
void run_randomized(const ExperimentConfig& cfg, const RowSink& sink);

// The two built-in 2x2 instances, by name.
ArrivalDistribution special_instance(const std::string& name);  // degenerate | nondegenerate

// Runs the grid on both built-in special instances.
void run_special(const ExperimentConfig& cfg, const RowSink& sink);

ArrivalDistribution random_instance(int agents, int types, double alpha, double beta, Rng& rng);

// Human-readable table plus a single-line JSON dump.
std::string schedule_report(const ResolveSchedule& s);

// JSON manifest (config echo, seed, build revision, timestamp) next to a CSV.
void write_manifest(const std::string& csv_path, const ExperimentConfig& cfg,
                    const std::string& command_line);

std::string build_revision();

}  // namespace fairalloc
