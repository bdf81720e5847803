#include "fairalloc/arrivals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fairalloc {

namespace {

std::string shape_error(const std::string& what) {
  return "arrival distribution: " + what;
}

}  // namespace

ArrivalDistribution::ArrivalDistribution(Eigen::MatrixXd support, Eigen::VectorXd probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  const auto L = support_.rows();
  const auto n = support_.cols();
  if (L < 1 || n < 1)
    throw std::invalid_argument(shape_error("support must be a nonempty types x agents matrix"));
  if (probs_.size() != L)
    throw std::invalid_argument(shape_error("probs length " + std::to_string(probs_.size()) +
                                            " does not match " + std::to_string(L) + " support rows"));
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = support_(l, i);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(shape_error("support row " + std::to_string(l) + ", agent " +
                                                std::to_string(i) + ": value outside [0, 1]"));
    }
  double sum = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    if (!(probs_[l] > 0.0))
      throw std::invalid_argument(shape_error("probs entry " + std::to_string(l) +
                                              " must be strictly positive"));
    sum += probs_[l];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument(shape_error("probs sum to " + std::to_string(sum) +
                                            ", expected 1 within 1e-12"));
  cum_.resize(L);
  double acc = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    acc += probs_[l];
    cum_[l] = acc;
  }
  cum_[L - 1] = 1.0;  // uniform() < 1, so the last type always catches the tail
}

int ArrivalDistribution::sample_type(Rng& rng) const {
  const double u = rng.uniform();
  const double* begin = cum_.data();
  const double* end = begin + cum_.size();
  return int(std::upper_bound(begin, end, u) - begin);
}

ArrivalDistribution ArrivalDistribution::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Report the 1-based line holding the offending byte.
    size_t line = 1;
    for (size_t k = 0; k < e.byte && k < text.size(); ++k)
      if (text[k] == '\n') ++line;
    throw std::invalid_argument("arrival distribution: JSON parse error at line " +
                                std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("support") || !j.contains("probs"))
    throw std::invalid_argument(shape_error("expected an object with 'support' and 'probs'"));
  const auto& sup = j["support"];
  const auto& pr = j["probs"];
  if (!sup.is_array() || sup.empty())
    throw std::invalid_argument(shape_error("'support' must be a nonempty array of rows"));
  if (!pr.is_array())
    throw std::invalid_argument(shape_error("'probs' must be an array"));
  const size_t L = sup.size();
  size_t n = 0;
  for (size_t l = 0; l < L; ++l) {
    if (!sup[l].is_array() || sup[l].empty())
      throw std::invalid_argument(shape_error("support row " + std::to_string(l) +
                                              " must be a nonempty array"));
    if (l == 0)
      n = sup[l].size();
    else if (sup[l].size() != n)
      throw std::invalid_argument(shape_error("support row " + std::to_string(l) + " has " +
                                              std::to_string(sup[l].size()) + " entries, row 0 has " +
                                              std::to_string(n)));
    for (size_t i = 0; i < n; ++i)
      if (!sup[l][i].is_number())
        throw std::invalid_argument(shape_error("support row " + std::to_string(l) + ", agent " +
                                                std::to_string(i) + ": not a number"));
  }
  if (pr.size() != L)
    throw std::invalid_argument(shape_error("'probs' has " + std::to_string(pr.size()) +
                                            " entries, 'support' has " + std::to_string(L) + " rows"));
  for (size_t l = 0; l < L; ++l)
    if (!pr[l].is_number())
      throw std::invalid_argument(shape_error("probs entry " + std::to_string(l) + ": not a number"));

  Eigen::MatrixXd support(L, n);
  Eigen::VectorXd probs(L);
  for (size_t l = 0; l < L; ++l) {
    for (size_t i = 0; i < n; ++i) support(l, i) = sup[l][i].get<double>();
    probs[l] = pr[l].get<double>();
  }
  return ArrivalDistribution(std::move(support), std::move(probs));
}

ArrivalDistribution ArrivalDistribution::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("arrival distribution: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string ArrivalDistribution::to_json() const {
  nlohmann::json j;
  j["support"] = nlohmann::json::array();
  for (Eigen::Index l = 0; l < support_.rows(); ++l) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < support_.cols(); ++i) row.push_back(support_(l, i));
    j["support"].push_back(std::move(row));
  }
  j["probs"] = nlohmann::json::array();
  for (Eigen::Index l = 0; l < probs_.size(); ++l) j["probs"].push_back(probs_[l]);
  return j.dump();
}

ArrivalSequence sample_sequence(const ArrivalDistribution& dist, int64_t T, SeedSpec seed) {
  if (T < 0) throw std::invalid_argument("horizon must be nonnegative");
  Rng rng(seed.master_seed, seed.stream_index);
  auto seq = ArrivalSequence(size_t(T));
  for (int64_t t = 0; t < T; ++t) seq[size_t(t)] = int32_t(dist.sample_type(rng));
  return seq;
}

TypeCounts count_types(const ArrivalSequence& seq, int types) {
  if (types < 1) throw std::invalid_argument("count_types: need at least one type");
  TypeCounts c;
  c.counts = Eigen::VectorXi::Zero(types);
  for (int32_t t : seq) {
    if (t < 0 || t >= types)
      throw std::out_of_range("count_types: type index " + std::to_string(t) + " out of range");
    ++c.counts[t];
  }
  c.total = int64_t(seq.size());
  return c;
}

double binomial_abs_deviation(int64_t T, int64_t reps, SeedSpec seed) {
  if (T < 1) throw std::invalid_argument("binomial_abs_deviation: T must be positive");
  if (reps < 1) throw std::invalid_argument("binomial_abs_deviation: reps must be positive");
  Rng rng(seed.master_seed, seed.stream_index);
  const int64_t words = T / 64;
  const int rem = int(T % 64);
  const uint64_t rem_mask = rem ? (~uint64_t(0) >> (64 - rem)) : 0;
  const double half = double(T) / 2.0;
  const double root = std::sqrt(double(T));
  double acc = 0.0;
  for (int64_t r = 0; r < reps; ++r) {
    int64_t N = 0;
    for (int64_t w = 0; w < words; ++w) N += std::popcount(rng.next_u64());
    if (rem) N += std::popcount(rng.next_u64() & rem_mask);
    acc += std::abs(double(N) - half);
  }
  return acc / double(reps) / root;
}

Eigen::VectorXd sample_simplex(Rng& rng, int m) {
  if (m < 1) throw std::invalid_argument("sample_simplex: need at least one coordinate");
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v[i] = rng.exponential();
  return v / v.sum();
}

}  // namespace fairalloc
