#include "fairalloc/simulator.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fairalloc {

const double* HindsightCache::find(const Eigen::VectorXi& counts) const {
  std::vector<int32_t> key(counts.data(), counts.data() + counts.size());
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : &it->second;
}

void HindsightCache::insert(const Eigen::VectorXi& counts, double value) {
  std::vector<int32_t> key(counts.data(), counts.data() + counts.size());
  map_.emplace(std::move(key), value);
}

TrajectoryResult run_trajectory(const PolicySpec& spec, const ArrivalDistribution& dist,
                                int64_t T, SeedSpec seed, const SolverConfig& cfg,
                                HindsightCache* cache) {
  TrajectoryResult out;
  out.seed = seed;
  const ArrivalSequence seq = sample_sequence(dist, T, seed);

  PolicyRun run(spec, dist, T, cfg);
  for (int32_t type : seq) run.step(type);
  out.alg = welfare_value(spec.q, run.utilities());
  out.counts = count_types(seq, dist.types());

  if (cache) {
    if (const double* hit = cache->find(out.counts.counts)) {
      out.opt = *hit;
    } else {
      out.opt = hindsight_opt(spec.q, dist, out.counts, cfg).value;
      cache->insert(out.counts.counts, out.opt);
    }
  } else {
    out.opt = hindsight_opt(spec.q, dist, out.counts, cfg).value;
  }

  if (out.alg > out.opt + 1e-6) {
    std::ostringstream msg;
    msg << "policy " << policy_token(spec.kind) << " (q=" << spec.q.str()
        << ") beat hindsight on T=" << T << ", seed=(" << seed.master_seed << ","
        << seed.stream_index << "): alg=" << out.alg << " opt=" << out.opt;
    throw std::runtime_error(msg.str());
  }
  return out;
}

RegretEstimate estimate_regret(const PolicySpec& spec, const ArrivalDistribution& dist,
                               int64_t T, int64_t reps, uint64_t master_seed,
                               const SolverConfig& cfg, const RunOptions& opt) {
  if (reps < 2) throw std::invalid_argument("estimate_regret: reps must be at least 2");

  int threads = opt.threads > 0 ? opt.threads : int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (int64_t(threads) > reps) threads = int(reps);

  std::vector<double> alg(static_cast<size_t>(reps));
  std::vector<double> hopt(static_cast<size_t>(reps));
  std::atomic<int64_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;

  const auto worker = [&]() {
    HindsightCache cache;  // per-worker; identical values, so no coordination needed
    for (;;) {
      const int64_t r = next.fetch_add(1);
      if (r >= reps || failed.load()) break;
      try {
        const TrajectoryResult tr =
            run_trajectory(spec, dist, T, SeedSpec{master_seed, uint64_t(r)}, cfg, &cache);
        alg[size_t(r)] = tr.alg;
        hopt[size_t(r)] = tr.opt;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!failed.exchange(true)) error = e.what();
        break;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads) - 1);
    for (int i = 0; i < threads - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(error);

  // Fixed-order reduction: parallel and serial runs agree bitwise.
  RegretEstimate est;
  est.reps = reps;
  double sum_alg = 0.0, sum_opt = 0.0;
  for (int64_t r = 0; r < reps; ++r) {
    sum_alg += alg[size_t(r)];
    sum_opt += hopt[size_t(r)];
  }
  est.mean_alg = sum_alg / double(reps);
  est.mean_opt = sum_opt / double(reps);
  // Defined as the difference of the means so downstream rows satisfy
  // regret == mean_opt - mean_alg exactly.
  est.mean_regret = est.mean_opt - est.mean_alg;
  double ss = 0.0;
  for (int64_t r = 0; r < reps; ++r) {
    const double d = (hopt[size_t(r)] - alg[size_t(r)]) - est.mean_regret;
    ss += d * d;
  }
  est.stderr_regret = std::sqrt(ss / double(reps - 1) / double(reps));
  est.rel_regret = est.mean_opt > 0.0 ? est.mean_regret / est.mean_opt : 0.0;
  return est;
}

}  // namespace fairalloc
