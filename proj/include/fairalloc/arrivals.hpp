#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fairalloc/rng.hpp"

namespace fairalloc {

// Addresses one replication: master_seed names the experiment, stream_index
// the replication within it.
struct SeedSpec {
  uint64_t master_seed = 0;
  uint64_t stream_index = 0;
};

// IID arrival model with finite support: each period one of `types` utility
// profiles over `agents` arrives, drawn with fixed strictly positive
// probabilities.  Row l of support() is the per-agent utility rate of type l.
class ArrivalDistribution {
 public:
  ArrivalDistribution(Eigen::MatrixXd support, Eigen::VectorXd probs);

  int types() const { return int(support_.rows()); }
  int agents() const { return int(support_.cols()); }
  const Eigen::MatrixXd& support() const { return support_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  double prob(int type) const { return probs_[type]; }

  // Inverse-CDF draw, one uniform per period.
  int sample_type(Rng& rng) const;

  // JSON object {"support": [[...] x L], "probs": [...]}; round-trip exact.
  static ArrivalDistribution from_json(const std::string& text);
  static ArrivalDistribution load(const std::string& path);
  std::string to_json() const;

 private:
  Eigen::MatrixXd support_;  // types x agents, entries in [0, 1]
  Eigen::VectorXd probs_;    // strictly positive, sums to 1 within 1e-12
  Eigen::VectorXd cum_;      // cumulative probabilities, last entry pinned to 1
};

using ArrivalSequence = std::vector<int32_t>;

struct TypeCounts {
  Eigen::VectorXi counts;
  int64_t total = 0;
};

// T type indices for the replication named by seed; bitwise reproducible.
ArrivalSequence sample_sequence(const ArrivalDistribution& dist, int64_t T, SeedSpec seed);

TypeCounts count_types(const ArrivalSequence& seq, int types);

// E|N - T/2| / sqrt(T) for N ~ Binomial(T, 1/2), estimated over `reps`
// replications; approaches 1/sqrt(2*pi) ~ 0.3989 as T grows.
double binomial_abs_deviation(int64_t T, int64_t reps, SeedSpec seed = {});

// Uniform draw from the (m-1)-simplex via normalized exponentials.
Eigen::VectorXd sample_simplex(Rng& rng, int m);

}  // namespace fairalloc
