#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fairalloc/policies.hpp"

namespace fairalloc {

struct TrajectoryResult {
  double alg = 0.0;   // welfare of the policy's final utilities
  double opt = 0.0;   // hindsight optimum for the realized counts
  TypeCounts counts;
  SeedSpec seed;
};

// Memoizes hindsight optima by realized count vector.  Valid for one
// (distribution, welfare) pair; realizations collide heavily at small T.
class HindsightCache {
 public:
  const double* find(const Eigen::VectorXi& counts) const;
  void insert(const Eigen::VectorXi& counts, double value);
  size_t size() const { return map_.size(); }

 private:
  struct VecHash {
    size_t operator()(const std::vector<int32_t>& v) const {
      size_t h = 1469598103934665603ull;
      for (int32_t x : v) {
        h ^= size_t(uint32_t(x));
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::vector<int32_t>, double, VecHash> map_;
};

// Samples one arrival sequence, replays the policy on it, and scores both
// sides.  Aborts (std::runtime_error) if the policy beats hindsight by more
// than 1e-6, which would mean a solver or accounting bug.
TrajectoryResult run_trajectory(const PolicySpec& spec, const ArrivalDistribution& dist,
                                int64_t T, SeedSpec seed, const SolverConfig& cfg = {},
                                HindsightCache* cache = nullptr);

struct RegretEstimate {
  double mean_alg = 0.0;
  double mean_opt = 0.0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double rel_regret = 0.0;  // mean_regret / mean_opt, 0 when mean_opt is 0
  int64_t reps = 0;
};

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
};

// Monte Carlo regret over reps replications; replication r draws stream r of
// master_seed.  Results are reduced in replication order, so output is
// bitwise identical for any thread count.
RegretEstimate estimate_regret(const PolicySpec& spec, const ArrivalDistribution& dist,
                               int64_t T, int64_t reps, uint64_t master_seed,
                               const SolverConfig& cfg = {}, const RunOptions& opt = {});

}  // namespace fairalloc
