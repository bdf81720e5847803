#include "fairalloc/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace fairalloc {

PolicyKind parse_policy(const std::string& token) {
  if (token == "f") return PolicyKind::Fluid;
  if (token == "fr") return PolicyKind::FrequentResolve;
  if (token == "bir") return PolicyKind::BackwardResolve;
  if (token == "birt") return PolicyKind::BackwardResolveThreshold;
  throw std::invalid_argument("unknown policy '" + token + "' (expected f, fr, bir or birt)");
}

std::string policy_token(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fluid: return "f";
    case PolicyKind::FrequentResolve: return "fr";
    case PolicyKind::BackwardResolve: return "bir";
    case PolicyKind::BackwardResolveThreshold: return "birt";
  }
  return "?";
}

ResolveSchedule make_schedule(int64_t T, double eta, int agents) {
  if (T < 0) throw std::invalid_argument("make_schedule: negative horizon");
  if (!(eta > 1.0)) throw std::invalid_argument("make_schedule: eta must exceed 1");
  if (agents < 1) throw std::invalid_argument("make_schedule: need at least one agent");

  ResolveSchedule s;
  s.horizon = T;
  s.eta = eta;
  if (T < 4) {  // log log T is nonpositive; degrade to the fluid policy
    s.K = 0;
    s.epochs = {0};
    s.thresholds = {0.0};
    return s;
  }

  const int K = int(std::ceil(std::log(std::log(double(T))) / std::log(eta)));
  s.K = K;
  std::vector<int64_t> t(size_t(K) + 1, 0);
  for (int k = 1; k <= K; ++k) {
    const double raw = std::floor(std::exp(std::pow(eta, double(K - k))));
    int64_t tk = T - int64_t(raw);
    if (tk < 0) tk = 0;
    t[size_t(k)] = tk;
  }
  std::vector<double> g(size_t(K) + 1, 0.0);
  const double denom_scale = 2.0 * double(agents) * double(agents);
  for (int k = 0; k < K; ++k)
    g[size_t(k)] = double(T - t[size_t(k) + 1]) / (denom_scale * double(T - t[size_t(k)]));

  // Equal raw epochs merge into one solve; the later threshold wins.
  for (int k = 0; k <= K; ++k) {
    if (!s.epochs.empty() && t[size_t(k)] == s.epochs.back()) {
      s.thresholds.back() = g[size_t(k)];
    } else {
      s.epochs.push_back(t[size_t(k)]);
      s.thresholds.push_back(g[size_t(k)]);
    }
  }
  return s;
}

StaticPolicy threshold_policy(const StaticPolicy& xi, double gamma) {
  const int L = int(xi.rows());
  const int n = int(xi.cols());
  if (L < 1 || n < 1) throw std::invalid_argument("threshold_policy: empty policy");
  if (!(gamma >= 0.0) || gamma >= 1.0 / double(n))
    throw std::invalid_argument("threshold_policy: threshold must lie in [0, 1/n)");

  StaticPolicy out = xi;
  for (int l = 0; l < L; ++l) {
    int j = 0;
    xi.row(l).maxCoeff(&j);  // first maximizer, i.e. lowest index on ties
    double kept = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      if (out(l, i) < gamma) out(l, i) = 0.0;
      kept += out(l, i);
    }
    out(l, j) = 1.0 - kept;  // the largest share absorbs everything rounded away
  }
  return out;
}

PolicyRun::PolicyRun(const PolicySpec& spec, const ArrivalDistribution& dist, int64_t T,
                     const SolverConfig& cfg)
    : PolicyRun(spec, dist, T,
                (spec.kind == PolicyKind::BackwardResolve ||
                 spec.kind == PolicyKind::BackwardResolveThreshold)
                    ? make_schedule(T, spec.eta, dist.agents())
                    : ResolveSchedule{T, spec.eta, 0, {0}, {0.0}},
                cfg) {}

PolicyRun::PolicyRun(const PolicySpec& spec, const ArrivalDistribution& dist, int64_t T,
                     ResolveSchedule schedule, const SolverConfig& cfg)
    : spec_(spec), dist_(dist), T_(T), cfg_(cfg), sched_(std::move(schedule)),
      B_(Eigen::VectorXd::Zero(dist.agents())) {
  if (T < 0) throw std::invalid_argument("policy horizon must be nonnegative");
  if (sched_.epochs.empty() || sched_.epochs.front() != 0 ||
      sched_.epochs.size() != sched_.thresholds.size())
    throw std::invalid_argument("resolve schedule must start at epoch 0 with aligned thresholds");
  resolve(T_);
  if (spec_.kind == PolicyKind::BackwardResolveThreshold)
    xi_ = threshold_policy(xi_, sched_.thresholds.front());
}

void PolicyRun::resolve(int64_t remaining) {
  const Eigen::VectorXd weights = double(remaining) * dist_.probs();
  SolveResult r = solve_fluid(spec_.q, dist_.support(), weights, B_, cfg_);
  xi_ = std::move(r.policy);
  ++solves_;
}

Eigen::VectorXd PolicyRun::step(int type) {
  if (t_ >= T_) throw std::logic_error("policy stepped past its horizon");
  if (type < 0 || type >= dist_.types())
    throw std::out_of_range("policy step: type index out of range");

  if (spec_.kind == PolicyKind::FrequentResolve) {
    if (t_ > 0) resolve(T_ - t_);  // the constructor already solved for t = 0
  } else if (spec_.kind == PolicyKind::BackwardResolve ||
             spec_.kind == PolicyKind::BackwardResolveThreshold) {
    if (epoch_ptr_ < sched_.epochs.size() && sched_.epochs[epoch_ptr_] == t_) {
      resolve(T_ - t_);
      if (spec_.kind == PolicyKind::BackwardResolveThreshold)
        xi_ = threshold_policy(xi_, sched_.thresholds[epoch_ptr_]);
      ++epoch_ptr_;
    }
  }

  const Eigen::VectorXd x = xi_.row(type);
  B_ += dist_.support().row(type).transpose().cwiseProduct(x);
  ++t_;
  return x;
}

}  // namespace fairalloc
