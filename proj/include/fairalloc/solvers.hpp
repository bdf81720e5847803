#pragma once

#include <Eigen/Dense>

#include "fairalloc/arrivals.hpp"
#include "fairalloc/welfare.hpp"

namespace fairalloc {

struct SolverConfig {
  double lp_tolerance = 1e-9;
  double grad_tolerance = 1e-8;
  int max_iters = 100000;
  double degeneracy_tolerance = 1e-7;
};

enum class SolveStatus { Optimal, MaxIters };

// types x agents allocation shares; every row lies on the agent simplex.
using StaticPolicy = Eigen::MatrixXd;

struct SolveResult {
  StaticPolicy policy;
  double value = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& v);

// max_xi min_i [ B0_i + sum_l weights_l * support(l,i) * xi(l,i) ] with every
// row of xi on the simplex.  Dense-tableau primal simplex on the epigraph
// form; deterministic pivoting (lowest-index tie-breaks, Bland's rule after a
// long non-improving streak).
SolveResult solve_egalitarian(const Eigen::Ref<const Eigen::MatrixXd>& support,
                              const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const Eigen::Ref<const Eigen::VectorXd>& B0,
                              const SolverConfig& cfg = {});

// Same objective under a smooth welfare parameter (finite q): projected
// gradient ascent with per-row simplex projection and Armijo backtracking
// halving from step 1.
SolveResult solve_smooth(const WelfareParam& q,
                         const Eigen::Ref<const Eigen::MatrixXd>& support,
                         const Eigen::Ref<const Eigen::VectorXd>& weights,
                         const Eigen::Ref<const Eigen::VectorXd>& B0,
                         const SolverConfig& cfg = {});

// Dispatches on q.
SolveResult solve_fluid(const WelfareParam& q,
                        const Eigen::Ref<const Eigen::MatrixXd>& support,
                        const Eigen::Ref<const Eigen::VectorXd>& weights,
                        const Eigen::Ref<const Eigen::VectorXd>& B0,
                        const SolverConfig& cfg = {});

// Best achievable welfare given realized type counts (static policies suffice
// offline).  Types with zero count are dropped for the solve and restored as
// uniform rows.
SolveResult hindsight_opt(const WelfareParam& q, const ArrivalDistribution& dist,
                          const TypeCounts& counts, const SolverConfig& cfg = {});

struct DegeneracyReport {
  bool degenerate = false;
  int active = 0;  // active agents + saturated rows + zero shares
};

// Counts active constraints of the time-zero egalitarian LP at (xi, value);
// more than types*agents + 1 of them marks the solution degenerate.  Agent
// activity uses a relative slack, zero shares an absolute one.
DegeneracyReport check_degeneracy(const StaticPolicy& xi,
                                  const Eigen::Ref<const Eigen::MatrixXd>& support,
                                  const Eigen::Ref<const Eigen::VectorXd>& weights,
                                  double value, const SolverConfig& cfg = {});

}  // namespace fairalloc
