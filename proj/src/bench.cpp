#include "fairalloc/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef FAIRALLOC_BUILD_REV
#define FAIRALLOC_BUILD_REV "unknown"
#endif

namespace fairalloc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::invalid_argument("CSV: cannot parse number '" + s + "'");
  return v;
}

int64_t parse_int(const std::string& s) {
  return int64_t(std::strtoll(s.c_str(), nullptr, 10));
}

// Derives the per-instance trajectory seed so instances draw disjoint streams.
uint64_t instance_master_seed(uint64_t master_seed, uint64_t instance) {
  return Rng(master_seed, 0x1000000000ull + instance).next_u64();
}

struct GridKey {
  std::string policy;
  std::string q;
  int64_t T;
  bool operator<(const GridKey& o) const {
    if (policy != o.policy) return policy < o.policy;
    if (q != o.q) return q < o.q;
    return T < o.T;
  }
};

}  // namespace

std::string csv_header() {
  return "experiment,instance,policy,q,eta,T,reps,mean_alg,mean_opt,regret,"
         "regret_stderr,rel_regret,flu_value,degenerate,wall_time_ms";
}

std::string csv_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.instance << ',' << r.policy << ',' << r.q.str() << ','
     << fmt_double(r.eta) << ',' << r.T << ',' << r.reps << ',' << fmt_double(r.mean_alg)
     << ',' << fmt_double(r.mean_opt) << ',' << fmt_double(r.regret) << ','
     << fmt_double(r.regret_stderr) << ',' << fmt_double(r.rel_regret) << ','
     << fmt_double(r.flu_value) << ',' << (r.degenerate ? "true" : "false") << ','
     << fmt_double(r.wall_time_ms);
  return os.str();
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("CSV: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV: empty file " + path);
  if (line != csv_header())
    throw std::invalid_argument("CSV: unexpected header in " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 15) throw std::invalid_argument("CSV: bad field count in row '" + line + "'");
    ResultRow r;
    r.experiment = f[0];
    r.instance = f[1];
    r.policy = f[2];
    r.q = WelfareParam::parse(f[3]);
    r.eta = parse_double(f[4]);
    r.T = parse_int(f[5]);
    r.reps = parse_int(f[6]);
    r.mean_alg = parse_double(f[7]);
    r.mean_opt = parse_double(f[8]);
    r.regret = parse_double(f[9]);
    r.regret_stderr = parse_double(f[10]);
    r.rel_regret = parse_double(f[11]);
    r.flu_value = parse_double(f[12]);
    if (f[13] != "true" && f[13] != "false")
      throw std::invalid_argument("CSV: bad degenerate flag '" + f[13] + "'");
    r.degenerate = f[13] == "true";
    r.wall_time_ms = parse_double(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void run_single(const ArrivalDistribution& dist, const ExperimentConfig& cfg,
                const std::string& experiment, const std::string& instance,
                const RowSink& sink) {
  if (cfg.kinds.empty() || cfg.qs.empty() || cfg.Ts.empty())
    throw std::invalid_argument("experiment needs at least one policy, q and T");

  for (const WelfareParam& q : cfg.qs) {
    for (const int64_t T : cfg.Ts) {
      if (T < 0) throw std::invalid_argument("experiment: negative horizon");
      const Eigen::VectorXd weights =
          double(std::max<int64_t>(T, 1)) * dist.probs();
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dist.agents());
      const double flu =
          T == 0 ? 0.0 : solve_fluid(q, dist.support(), weights, zero, cfg.solver).value;
      // Degeneracy is a property of the time-zero egalitarian LP; report it on
      // every row of the instance (scale makes no difference to the count).
      const SolveResult egal = solve_egalitarian(dist.support(), weights, zero, cfg.solver);
      const bool degenerate =
          check_degeneracy(egal.policy, dist.support(), weights, egal.value, cfg.solver)
              .degenerate;

      for (const PolicyKind kind : cfg.kinds) {
        const int64_t reps = cfg.reps > 0 ? cfg.reps : default_reps(T);
        const PolicySpec spec{kind, q, cfg.eta};
        const auto t0 = std::chrono::steady_clock::now();
        const RegretEstimate est =
            estimate_regret(spec, dist, T, reps, cfg.master_seed, cfg.solver, cfg.run);
        const auto t1 = std::chrono::steady_clock::now();

        ResultRow row;
        row.experiment = experiment;
        row.instance = instance;
        row.policy = policy_token(kind);
        row.q = q;
        row.eta = cfg.eta;
        row.T = T;
        row.reps = reps;
        row.mean_alg = est.mean_alg;
        row.mean_opt = est.mean_opt;
        row.regret = est.mean_regret;
        row.regret_stderr = est.stderr_regret;
        row.rel_regret = est.rel_regret;
        row.flu_value = flu;
        row.degenerate = degenerate;
        row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        sink(row);
      }
    }
  }
}

ArrivalDistribution random_instance(int agents, int types, double alpha, double beta,
                                    Rng& rng) {
  if (agents < 1 || types < 1)
    throw std::invalid_argument("random_instance: need at least one agent and type");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("random_instance: Beta shape parameters must be positive");
  Eigen::MatrixXd support(types, agents);
  for (int l = 0; l < types; ++l)
    for (int i = 0; i < agents; ++i) support(l, i) = rng.beta(alpha, beta);
  const Eigen::VectorXd probs = sample_simplex(rng, types);
  return ArrivalDistribution(std::move(support), probs);
}

void run_randomized(const ExperimentConfig& cfg, const RowSink& sink) {
  if (cfg.instances < 1) throw std::invalid_argument("randomized experiment: instances must be positive");

  std::map<GridKey, std::vector<ResultRow>> per_point;
  for (int j = 0; j < cfg.instances; ++j) {
    Rng gen(cfg.master_seed, 0x2000000000ull + uint64_t(j));
    const ArrivalDistribution dist =
        random_instance(cfg.agents, cfg.types, cfg.alpha, cfg.beta, gen);
    ExperimentConfig inst_cfg = cfg;
    inst_cfg.master_seed = instance_master_seed(cfg.master_seed, uint64_t(j));
    run_single(dist, inst_cfg, "randomized", std::to_string(j),
               [&](const ResultRow& row) {
                 per_point[GridKey{row.policy, row.q.str(), row.T}].push_back(row);
                 sink(row);
               });
  }

  // Cross-instance summary rows: rel_regret is the plain average of the
  // per-instance relative regrets.
  for (const auto& [key, rows] : per_point) {
    ResultRow mean;
    mean.experiment = "randomized";
    mean.instance = "mean";
    mean.policy = key.policy;
    mean.q = WelfareParam::parse(key.q);
    mean.eta = cfg.eta;
    mean.T = key.T;
    mean.reps = rows.front().reps;
    const double M = double(rows.size());
    double var_acc = 0.0;
    for (const ResultRow& r : rows) {
      mean.mean_alg += r.mean_alg / M;
      mean.mean_opt += r.mean_opt / M;
      mean.regret += r.regret / M;
      mean.rel_regret += r.rel_regret / M;
      mean.flu_value += r.flu_value / M;
      mean.wall_time_ms += r.wall_time_ms / M;
      mean.degenerate = mean.degenerate || r.degenerate;
      var_acc += r.regret_stderr * r.regret_stderr;
    }
    mean.regret_stderr = std::sqrt(var_acc) / M;
    sink(mean);
  }
}

ArrivalDistribution special_instance(const std::string& name) {
  Eigen::MatrixXd support(2, 2);
  support << 1.0, 0.5,
             0.5, 1.0;
  Eigen::VectorXd probs(2);
  if (name == "degenerate") {
    probs << 0.5, 0.5;
  } else if (name == "nondegenerate") {
    probs << 0.4, 0.6;
  } else {
    throw std::invalid_argument("unknown special instance '" + name +
                                "' (expected degenerate or nondegenerate)");
  }
  return ArrivalDistribution(std::move(support), std::move(probs));
}

void run_special(const ExperimentConfig& cfg, const RowSink& sink) {
  const std::string names[] = {"degenerate", "nondegenerate"};
  for (uint64_t j = 0; j < 2; ++j) {
    ExperimentConfig inst_cfg = cfg;
    inst_cfg.master_seed = instance_master_seed(cfg.master_seed, 0x5E00 + j);
    run_single(special_instance(names[j]), inst_cfg, "special", names[j], sink);
  }
}

std::string schedule_report(const ResolveSchedule& s) {
  std::ostringstream os;
  os << "T = " << s.horizon << ", eta = " << fmt_double(s.eta) << ", K = " << s.K
     << ", solves = " << s.epochs.size() << "\n";
  os << "  k      epoch       threshold\n";
  for (size_t k = 0; k < s.epochs.size(); ++k) {
    char line[80];
    std::snprintf(line, sizeof line, "%3zu %10lld %15.10g\n", k,
                  (long long)s.epochs[k], s.thresholds[k]);
    os << line;
  }
  nlohmann::json j;
  j["T"] = s.horizon;
  j["eta"] = s.eta;
  j["K"] = s.K;
  j["epochs"] = s.epochs;
  j["thresholds"] = s.thresholds;
  os << j.dump() << "\n";
  return os.str();
}

std::string build_revision() { return FAIRALLOC_BUILD_REV; }

void write_manifest(const std::string& csv_path, const ExperimentConfig& cfg,
                    const std::string& command_line) {
  nlohmann::json j;
  j["command"] = command_line;
  j["build"] = build_revision();
  j["master_seed"] = cfg.master_seed;
  j["eta"] = cfg.eta;
  j["reps"] = cfg.reps;
  j["instances"] = cfg.instances;
  j["agents"] = cfg.agents;
  j["types"] = cfg.types;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["T"] = cfg.Ts;
  std::vector<std::string> qs, kinds;
  for (const auto& q : cfg.qs) qs.push_back(q.str());
  for (const auto& k : cfg.kinds) kinds.push_back(policy_token(k));
  j["q"] = qs;
  j["policy"] = kinds;
  j["lp_tolerance"] = cfg.solver.lp_tolerance;
  j["grad_tolerance"] = cfg.solver.grad_tolerance;
  j["max_iters"] = cfg.solver.max_iters;
  j["threads"] = cfg.run.threads;
  const auto now = std::chrono::system_clock::now();
  j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                          now.time_since_epoch())
                          .count();
  std::ofstream out(csv_path + ".manifest.json");
  if (!out) throw std::invalid_argument("cannot write manifest next to '" + csv_path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace fairalloc
