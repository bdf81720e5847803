#include "fairalloc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fairalloc {

namespace {

void require_problem(const Eigen::Ref<const Eigen::MatrixXd>& support,
                     const Eigen::Ref<const Eigen::VectorXd>& weights,
                     const Eigen::Ref<const Eigen::VectorXd>& B0) {
  const auto L = support.rows();
  const auto n = support.cols();
  if (L < 1 || n < 1)
    throw std::invalid_argument("solver: support must be a nonempty types x agents matrix");
  if (weights.size() != L)
    throw std::invalid_argument("solver: weights length does not match support rows");
  if (B0.size() != n)
    throw std::invalid_argument("solver: B0 length does not match support columns");
  if (!support.allFinite() || (support.array() < 0.0).any() || (support.array() > 1.0).any())
    throw std::invalid_argument("solver: support entries must lie in [0, 1]");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw std::invalid_argument("solver: weights must be finite and nonnegative");
  if (!B0.allFinite() || (B0.array() < 0.0).any())
    throw std::invalid_argument("solver: B0 must be finite and nonnegative");
}

// Dense-tableau primal simplex for  max c'x  s.t.  Ax <= b, x >= 0  with
// b >= 0, so the all-slack basis starts feasible and no phase 1 is needed.
// Entering: most negative reduced cost, lowest index on ties; after a long
// non-improving streak it falls back to Bland's rule, and min-ratio ties
// leave the row with the smallest basis label, so pivoting is deterministic
// and cannot cycle.
class SimplexTableau {
 public:
  double solve(int m, int nv, const double* A, const double* b, const double* c,
               double tol, Eigen::VectorXd& x) {
    const int ncols = nv + m + 1;
    tab_.assign(size_t(m) * ncols, 0.0);
    obj_.assign(ncols, 0.0);
    basis_.resize(m);
    for (int r = 0; r < m; ++r) {
      double* row = &tab_[size_t(r) * ncols];
      std::copy(A + size_t(r) * nv, A + size_t(r + 1) * nv, row);
      row[nv + r] = 1.0;
      row[ncols - 1] = b[r];
      basis_[r] = nv + r;
    }
    for (int j = 0; j < nv; ++j) obj_[j] = -c[j];

    const int bland_after = 50 * m;
    const long max_pivots = 2000 + 200L * (m + nv);
    int streak = 0;
    long pivots = 0;
    double last = 0.0;
    for (;;) {
      int enter = -1;
      if (streak <= bland_after) {
        double best = -tol;
        for (int j = 0; j < ncols - 1; ++j)
          if (obj_[j] < best) {
            best = obj_[j];
            enter = j;
          }
      } else {
        for (int j = 0; j < ncols - 1; ++j)
          if (obj_[j] < -tol) {
            enter = j;
            break;
          }
      }
      if (enter < 0) break;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m; ++r) {
        const double a = tab_[size_t(r) * ncols + enter];
        if (a > tol) {
          const double ratio = tab_[size_t(r) * ncols + ncols - 1] / a;
          if (leave < 0) {
            leave = r;
            best_ratio = ratio;
            continue;
          }
          const double band = 1e-9 * (1.0 + std::abs(best_ratio));
          if (ratio < best_ratio - band) {
            leave = r;
            best_ratio = ratio;
          } else if (ratio <= best_ratio + band && basis_[r] < basis_[leave]) {
            leave = r;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
      if (leave < 0)
        throw std::runtime_error("epigraph LP: unbounded improving direction");

      pivot(m, ncols, leave, enter);
      if (++pivots > max_pivots)
        throw std::runtime_error("epigraph LP: pivot limit exceeded");
      const double val = obj_[ncols - 1];
      if (val > last + tol * std::max(1.0, std::abs(last))) {
        streak = 0;
        last = val;
      } else {
        ++streak;
      }
    }

    x.setZero(nv);
    for (int r = 0; r < m; ++r)
      if (basis_[r] < nv) x[basis_[r]] = tab_[size_t(r) * ncols + ncols - 1];
    return obj_[ncols - 1];
  }

 private:
  void pivot(int m, int ncols, int leave, int enter) {
    double* prow = &tab_[size_t(leave) * ncols];
    const double inv = 1.0 / prow[enter];
    for (int j = 0; j < ncols; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      double* row = &tab_[size_t(r) * ncols];
      const double f = row[enter];
      if (f != 0.0) {
        for (int j = 0; j < ncols; ++j) row[j] -= f * prow[j];
        row[enter] = 0.0;
      }
    }
    const double f = obj_[enter];
    if (f != 0.0) {
      for (int j = 0; j < ncols; ++j) obj_[j] -= f * prow[j];
      obj_[enter] = 0.0;
    }
    basis_[leave] = enter;
  }

  std::vector<double> tab_;
  std::vector<double> obj_;
  std::vector<int> basis_;
};

void project_rows_inplace(StaticPolicy& M) {
  Eigen::VectorXd row;
  for (Eigen::Index l = 0; l < M.rows(); ++l) {
    row = M.row(l);
    M.row(l) = project_to_simplex(row).transpose();
  }
}

}  // namespace

Eigen::VectorXd project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int n = int(v.size());
  if (n < 1) throw std::invalid_argument("project_to_simplex: empty vector");
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[size_t(i)] = v[i];
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  for (int j = 0; j < n; ++j) {
    css += u[size_t(j)];
    const double t = (css - 1.0) / double(j + 1);
    if (u[size_t(j)] - t > 0.0) tau = t;
  }
  return (v.array() - tau).max(0.0);
}

SolveResult solve_egalitarian(const Eigen::Ref<const Eigen::MatrixXd>& support,
                              const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const Eigen::Ref<const Eigen::VectorXd>& B0,
                              const SolverConfig& cfg) {
  require_problem(support, weights, B0);
  const int L = int(support.rows());
  const int n = int(support.cols());
  // Epigraph form with agent 0's share substituted out of every simplex row:
  // variables (u, xi(l,i) for i >= 1), n agent rows plus L row-sum caps.
  const int nv = 1 + L * (n - 1);
  const int m = n + L;
  const auto idx = [n](int l, int i) { return 1 + l * (n - 1) + (i - 1); };

  thread_local std::vector<double> A, b, c;
  A.assign(size_t(m) * nv, 0.0);
  b.assign(size_t(m), 0.0);
  c.assign(size_t(nv), 0.0);
  c[0] = 1.0;

  double rhs0 = B0[0];
  A[0] = 1.0;
  for (int l = 0; l < L; ++l) {
    const double wb = weights[l] * support(l, 0);
    rhs0 += wb;
    for (int i = 1; i < n; ++i) A[size_t(0) * nv + idx(l, i)] = wb;
  }
  b[0] = rhs0;
  for (int i = 1; i < n; ++i) {
    A[size_t(i) * nv] = 1.0;
    for (int l = 0; l < L; ++l)
      A[size_t(i) * nv + idx(l, i)] = -weights[l] * support(l, i);
    b[size_t(i)] = B0[i];
  }
  for (int l = 0; l < L; ++l) {
    for (int i = 1; i < n; ++i) A[size_t(n + l) * nv + idx(l, i)] = 1.0;
    b[size_t(n + l)] = 1.0;
  }

  thread_local SimplexTableau lp;
  thread_local Eigen::VectorXd x;
  const double value = lp.solve(m, nv, A.data(), b.data(), c.data(), cfg.lp_tolerance, x);

  StaticPolicy xi(L, n);
  for (int l = 0; l < L; ++l) {
    double rest = 0.0;
    for (int i = 1; i < n; ++i) {
      double v = x[idx(l, i)];
      v = std::min(1.0, std::max(0.0, v));
      xi(l, i) = v;
      rest += v;
    }
    xi(l, 0) = std::max(0.0, 1.0 - rest);
  }
  return {std::move(xi), value, SolveStatus::Optimal};
}

SolveResult solve_smooth(const WelfareParam& q,
                         const Eigen::Ref<const Eigen::MatrixXd>& support,
                         const Eigen::Ref<const Eigen::VectorXd>& weights,
                         const Eigen::Ref<const Eigen::VectorXd>& B0,
                         const SolverConfig& cfg) {
  if (!q.is_smooth())
    throw std::invalid_argument("solve_smooth needs a finite welfare exponent");
  require_problem(support, weights, B0);
  const int L = int(support.rows());
  const int n = int(support.cols());
  StaticPolicy xi = StaticPolicy::Constant(L, n, 1.0 / double(n));

  if (q.exponent() <= 0.0) {
    // An agent no type ever pays and no endowment covers pins the welfare at
    // zero for q <= 0; every policy is optimal then.
    for (int i = 0; i < n; ++i) {
      bool reachable = B0[i] > 0.0;
      for (int l = 0; l < L && !reachable; ++l)
        reachable = weights[l] * support(l, i) > 0.0;
      if (!reachable) return {std::move(xi), 0.0, SolveStatus::Optimal};
    }
  }

  // Welfare is positively homogeneous, so normalize to unit scale; this keeps
  // gradients O(1) and makes the step/tolerance constants scale-free.
  const double scale = weights.sum() + B0.maxCoeff();
  if (scale <= 0.0) return {std::move(xi), welfare_value(q, B0), SolveStatus::Optimal};
  const Eigen::VectorXd w = weights / scale;
  const Eigen::VectorXd b0 = B0 / scale;

  const auto utilities = [&](const StaticPolicy& p) -> Eigen::VectorXd {
    return b0 + (support.cwiseProduct(p)).transpose() * w;
  };
  const auto fval = [&](const StaticPolicy& p) { return welfare_value(q, utilities(p)); };

  double f = fval(xi);
  SolveStatus status = SolveStatus::MaxIters;
  StaticPolicy G(L, n), cand(L, n);
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd B = utilities(xi).cwiseMax(1e-14);  // caps the q < 1 blowup at 0
    const Eigen::VectorXd gB = welfare_gradient(q, B);
    G = (w * gB.transpose()).cwiseProduct(support);

    // Unit-step gradient mapping doubles as the convergence residual.
    cand = xi + G;
    project_rows_inplace(cand);
    if ((cand - xi).cwiseAbs().maxCoeff() < cfg.grad_tolerance) {
      status = SolveStatus::Optimal;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int h = 0; h < 60; ++h) {
      if (h > 0) {
        cand = xi + alpha * G;
        project_rows_inplace(cand);
      }
      const double lin = (G.cwiseProduct(cand - xi)).sum();
      const double fc = fval(cand);
      if (lin > 0.0 && fc >= f + 1e-4 * lin) {
        xi.swap(cand);
        f = fc;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {  // no float-representable improvement left
      status = SolveStatus::Optimal;
      break;
    }
  }
  return {std::move(xi), f * scale, status};
}

SolveResult solve_fluid(const WelfareParam& q,
                        const Eigen::Ref<const Eigen::MatrixXd>& support,
                        const Eigen::Ref<const Eigen::VectorXd>& weights,
                        const Eigen::Ref<const Eigen::VectorXd>& B0,
                        const SolverConfig& cfg) {
  return q.is_egalitarian() ? solve_egalitarian(support, weights, B0, cfg)
                            : solve_smooth(q, support, weights, B0, cfg);
}

SolveResult hindsight_opt(const WelfareParam& q, const ArrivalDistribution& dist,
                          const TypeCounts& counts, const SolverConfig& cfg) {
  const int L = dist.types();
  const int n = dist.agents();
  if (int(counts.counts.size()) != L)
    throw std::invalid_argument("hindsight_opt: counts length does not match types");
  if ((counts.counts.array() < 0).any())
    throw std::invalid_argument("hindsight_opt: negative count");

  std::vector<int> keep;
  keep.reserve(size_t(L));
  for (int l = 0; l < L; ++l)
    if (counts.counts[l] > 0) keep.push_back(l);

  StaticPolicy xi = StaticPolicy::Constant(L, n, 1.0 / double(n));
  if (keep.empty()) return {std::move(xi), 0.0, SolveStatus::Optimal};

  Eigen::MatrixXd sub(int(keep.size()), n);
  Eigen::VectorXd wsub(int(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    sub.row(Eigen::Index(k)) = dist.support().row(keep[k]);
    wsub[Eigen::Index(k)] = double(counts.counts[keep[k]]);
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  SolveResult r = q.is_egalitarian() ? solve_egalitarian(sub, wsub, zero, cfg)
                                     : solve_smooth(q, sub, wsub, zero, cfg);
  for (size_t k = 0; k < keep.size(); ++k) xi.row(keep[k]) = r.policy.row(Eigen::Index(k));
  return {std::move(xi), r.value, r.status};
}

DegeneracyReport check_degeneracy(const StaticPolicy& xi,
                                  const Eigen::Ref<const Eigen::MatrixXd>& support,
                                  const Eigen::Ref<const Eigen::VectorXd>& weights,
                                  double value, const SolverConfig& cfg) {
  const int L = int(support.rows());
  const int n = int(support.cols());
  if (int(xi.rows()) != L || int(xi.cols()) != n)
    throw std::invalid_argument("check_degeneracy: policy shape does not match support");
  if (weights.size() != L)
    throw std::invalid_argument("check_degeneracy: weights length does not match support rows");

  const Eigen::VectorXd util = (support.cwiseProduct(xi)).transpose() * weights;
  const double activity_slack = cfg.degeneracy_tolerance * std::max(1.0, std::abs(value));
  int active = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(util[i] - value) <= activity_slack) ++active;
  for (int l = 0; l < L; ++l)
    if (std::abs(xi.row(l).sum() - 1.0) <= cfg.degeneracy_tolerance) ++active;
  for (int l = 0; l < L; ++l)
    for (int i = 0; i < n; ++i)
      if (xi(l, i) <= cfg.degeneracy_tolerance) ++active;
  return {active > L * n + 1, active};
}

}  // namespace fairalloc
