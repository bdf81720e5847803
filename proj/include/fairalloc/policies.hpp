#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairalloc/solvers.hpp"

namespace fairalloc {

enum class PolicyKind { Fluid, FrequentResolve, BackwardResolve, BackwardResolveThreshold };

// CLI tokens: f | fr | bir | birt.
PolicyKind parse_policy(const std::string& token);
std::string policy_token(PolicyKind kind);

// A policy plus the parameters it solves under.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Fluid;
  WelfareParam q = WelfareParam::egalitarian();
  double eta = 1.05;  // schedule growth rate for bir/birt
};

// Doubly exponential re-solve schedule: epochs t_k = T - floor(exp(eta^(K-k)))
// for k in [K] with t_0 = 0, clamped/deduplicated ascending (later epoch's
// threshold wins a merge); thresholds gamma_k = (T - t_{k+1}) /
// (2 n^2 (T - t_k)) with gamma_K = 0.  Horizons below 4 collapse to the
// single epoch 0 (the policy degrades to the fluid one).
struct ResolveSchedule {
  int64_t horizon = 0;
  double eta = 0.0;
  int K = 0;
  std::vector<int64_t> epochs;      // ascending, epochs[0] == 0
  std::vector<double> thresholds;   // aligned with epochs; last entry 0
};

ResolveSchedule make_schedule(int64_t T, double eta, int agents);

// Rounds each row's entries below gamma into the row's largest entry (ties
// break toward the lowest index).  Output entries lie in {0} or [gamma, 1];
// requires gamma in [0, 1/n).
StaticPolicy threshold_policy(const StaticPolicy& xi, double gamma);

// Replays one arrival sequence under a policy: solves the time-zero fluid
// problem up front and re-solves per its kind (every period for fr, at
// schedule epochs for bir/birt, never for f).  step() consumes one arrival
// and returns the allocation row applied to it.
class PolicyRun {
 public:
  PolicyRun(const PolicySpec& spec, const ArrivalDistribution& dist, int64_t T,
            const SolverConfig& cfg = {});
  // Injected schedule (testing hook; ignored by f/fr).
  PolicyRun(const PolicySpec& spec, const ArrivalDistribution& dist, int64_t T,
            ResolveSchedule schedule, const SolverConfig& cfg = {});

  Eigen::VectorXd step(int type);

  const Eigen::VectorXd& utilities() const { return B_; }
  const StaticPolicy& policy() const { return xi_; }
  const ResolveSchedule& schedule() const { return sched_; }
  int64_t t() const { return t_; }
  int solves() const { return solves_; }

 private:
  void resolve(int64_t remaining);

  PolicySpec spec_;
  const ArrivalDistribution& dist_;
  int64_t T_;
  SolverConfig cfg_;
  ResolveSchedule sched_;
  StaticPolicy xi_;
  Eigen::VectorXd B_;
  int64_t t_ = 0;
  size_t epoch_ptr_ = 1;
  int solves_ = 0;
};

}  // namespace fairalloc
