#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairalloc/arrivals.hpp"
#include "fairalloc/policies.hpp"

using namespace fairalloc;

namespace {

ArrivalDistribution cross(double p1) {
  Eigen::MatrixXd support(2, 2);
  support << 1.0, 0.5, 0.5, 1.0;
  Eigen::VectorXd probs(2);
  probs << p1, 1.0 - p1;
  return ArrivalDistribution(support, probs);
}

Eigen::VectorXd row3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("schedule: exact small example") {
  const ResolveSchedule s = make_schedule(16, 1.25, 2);
  CHECK(s.K == 5);
  CHECK(s.epochs == std::vector<int64_t>{0, 5, 9, 12, 13, 14});
  REQUIRE(s.thresholds.size() == 6);
  CHECK(s.thresholds[0] == doctest::Approx(11.0 / 128.0).epsilon(1e-15));
  CHECK(s.thresholds[1] == doctest::Approx(7.0 / 88.0).epsilon(1e-15));
  CHECK(s.thresholds[2] == doctest::Approx(1.0 / 14.0).epsilon(1e-15));
  CHECK(s.thresholds[3] == doctest::Approx(3.0 / 32.0).epsilon(1e-15));
  CHECK(s.thresholds[4] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(s.thresholds[5] == 0.0);
}

TEST_CASE("schedule: doubly logarithmic epoch count at scale") {
  const ResolveSchedule s = make_schedule(65536, 1.05, 2);
  CHECK(s.K == 50);
  CHECK(s.epochs.front() == 0);
  CHECK(s.epochs.back() == 65534);
  for (size_t k = 1; k < s.epochs.size(); ++k) CHECK(s.epochs[k] > s.epochs[k - 1]);
  for (size_t k = 0; k < s.thresholds.size(); ++k) {
    CHECK(s.thresholds[k] >= 0.0);
    CHECK(s.thresholds[k] < 1.0 / 8.0);  // 1/(2 n^2) with n=2
  }
  CHECK(s.thresholds.back() == 0.0);
}

TEST_CASE("schedule: final epoch is T-2 for every T >= 4") {
  for (int64_t T : {4, 5, 7, 16, 100, 1000, 4096}) {
    for (double eta : {1.05, 1.15, 1.3}) {
      const ResolveSchedule s = make_schedule(T, eta, 2);
      CHECK(s.epochs.back() == T - 2);
      CHECK(s.epochs.front() == 0);
      CHECK(s.thresholds.back() == 0.0);
      for (size_t k = 1; k < s.epochs.size(); ++k) CHECK(s.epochs[k] > s.epochs[k - 1]);
      CHECK(s.epochs.size() == s.thresholds.size());
    }
  }
}

TEST_CASE("schedule: tiny horizons degrade to a single initial solve") {
  for (int64_t T : {0, 1, 2, 3}) {
    const ResolveSchedule s = make_schedule(T, 1.05, 2);
    CHECK(s.epochs == std::vector<int64_t>{0});
    CHECK(s.thresholds == std::vector<double>{0.0});
  }
}

TEST_CASE("schedule: merged epochs keep the later threshold") {
  // At T=100, eta=1.05 the last two raw epochs collide at 98; the survivor
  // must carry the final gamma_K = 0.
  const ResolveSchedule s = make_schedule(100, 1.05, 2);
  CHECK(s.epochs.back() == 98);
  CHECK(s.thresholds.back() == 0.0);
  CHECK(int64_t(s.epochs.size()) < s.K + 1);
  for (size_t k = 1; k < s.epochs.size(); ++k) CHECK(s.epochs[k] > s.epochs[k - 1]);
}

TEST_CASE("schedule: invalid parameters are rejected") {
  CHECK_THROWS_AS(make_schedule(16, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(16, 0.9, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(-1, 1.05, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(16, 1.05, 0), std::invalid_argument);
}

TEST_CASE("thresholding: hand-traced example") {
  StaticPolicy xi(1, 3);
  xi << 0.9, 0.06, 0.04;
  const StaticPolicy out = threshold_policy(xi, 0.05);
  CHECK(out(0, 0) == doctest::Approx(0.94).epsilon(1e-15));
  CHECK(out(0, 1) == doctest::Approx(0.06).epsilon(1e-15));
  CHECK(out(0, 2) == 0.0);
}

TEST_CASE("thresholding: gamma zero is the identity") {
  StaticPolicy xi(2, 3);
  xi << 0.2, 0.5, 0.3, 0.01, 0.98, 0.01;
  CHECK(threshold_policy(xi, 0.0) == xi);
}

TEST_CASE("thresholding: entries already above gamma are untouched") {
  StaticPolicy xi(1, 2);
  xi << 0.5, 0.5;
  const StaticPolicy out = threshold_policy(xi, 0.1);
  CHECK(out(0, 0) == 0.5);
  CHECK(out(0, 1) == 0.5);
}

TEST_CASE("thresholding: argmax ties break to the lowest index") {
  StaticPolicy xi(1, 3);
  xi << 0.4, 0.4, 0.2;
  const StaticPolicy out = threshold_policy(xi, 0.25);
  CHECK(out(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out(0, 1) == 0.4);
  CHECK(out(0, 2) == 0.0);
}

TEST_CASE("thresholding: output rows stay on the simplex with entries in {0} u [gamma,1]") {
  Rng rng(50, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + int(rng.uniform() * 4);
    StaticPolicy xi(1, n);
    Eigen::VectorXd draw = sample_simplex(rng, n);
    xi.row(0) = draw.transpose();
    const double gamma = rng.uniform() / double(n) * 0.999;
    const StaticPolicy out = threshold_policy(xi, gamma);
    CHECK(out.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < n; ++i) {
      const double v = out(0, i);
      CHECK(v >= 0.0);
      CHECK((v == 0.0 || v >= gamma - 1e-12));
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("thresholding: gamma at or above 1/n is rejected") {
  StaticPolicy xi(1, 2);
  xi << 0.5, 0.5;
  CHECK_THROWS_AS(threshold_policy(xi, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(threshold_policy(xi, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(threshold_policy(xi, -0.1), std::invalid_argument);
}

TEST_CASE("policy tokens") {
  CHECK(parse_policy("f") == PolicyKind::Fluid);
  CHECK(parse_policy("fr") == PolicyKind::FrequentResolve);
  CHECK(parse_policy("bir") == PolicyKind::BackwardResolve);
  CHECK(parse_policy("birt") == PolicyKind::BackwardResolveThreshold);
  for (const char* tok : {"f", "fr", "bir", "birt"})
    CHECK(policy_token(parse_policy(tok)) == tok);
  CHECK_THROWS_AS(parse_policy("frt"), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy(""), std::invalid_argument);
}

TEST_CASE("fluid policy solves once and allocates statically") {
  const ArrivalDistribution d = cross(0.5);
  PolicyRun run(PolicySpec{PolicyKind::Fluid, WelfareParam::egalitarian(), 1.05}, d, 16);
  CHECK(run.solves() == 1);
  const Eigen::VectorXd x0 = run.step(0);
  CHECK(x0[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x0[1] == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::VectorXd x1 = run.step(1);
  CHECK(x1[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x1[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(run.solves() == 1);
  CHECK(run.utilities()[0] == doctest::Approx(1.0));
  CHECK(run.utilities()[1] == doctest::Approx(1.0));
}

TEST_CASE("solve counts: FR solves every period, BIR/BIRT follow the schedule") {
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 32;
  const ArrivalSequence seq = sample_sequence(d, T, SeedSpec{9, 0});

  PolicyRun fr(PolicySpec{PolicyKind::FrequentResolve, WelfareParam::egalitarian(), 1.05},
               d, T);
  for (int32_t b : seq) fr.step(b);
  CHECK(fr.solves() == T);

  PolicyRun bir(PolicySpec{PolicyKind::BackwardResolve, WelfareParam::egalitarian(), 1.25},
                d, T);
  for (int32_t b : seq) bir.step(b);
  CHECK(bir.solves() == int64_t(bir.schedule().epochs.size()));

  PolicyRun birt(
      PolicySpec{PolicyKind::BackwardResolveThreshold, WelfareParam::egalitarian(), 1.25},
      d, T);
  for (int32_t b : seq) birt.step(b);
  CHECK(birt.solves() == int64_t(birt.schedule().epochs.size()));
  CHECK(birt.solves() <= birt.schedule().K + 1);
}

TEST_CASE("fluid and frequent re-solving share the initial policy") {
  const ArrivalDistribution d = cross(0.4);
  PolicyRun f(PolicySpec{PolicyKind::Fluid, WelfareParam::nash(), 1.05}, d, 16);
  PolicyRun fr(PolicySpec{PolicyKind::FrequentResolve, WelfareParam::nash(), 1.05}, d, 16);
  CHECK(f.policy() == fr.policy());
}

TEST_CASE("allocations stay on the simplex for every policy") {
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 24;
  const ArrivalSequence seq = sample_sequence(d, T, SeedSpec{10, 0});
  for (PolicyKind kind : {PolicyKind::Fluid, PolicyKind::FrequentResolve,
                          PolicyKind::BackwardResolve, PolicyKind::BackwardResolveThreshold}) {
    for (const WelfareParam& q : {WelfareParam::egalitarian(), WelfareParam::nash()}) {
      PolicyRun run(PolicySpec{kind, q, 1.05}, d, T);
      Eigen::VectorXd prevB = Eigen::VectorXd::Zero(2);
      for (int32_t b : seq) {
        const Eigen::VectorXd x = run.step(b);
        CHECK(x.minCoeff() >= -1e-12);
        CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((run.utilities() - prevB).minCoeff() >= -1e-15);  // B is nondecreasing
        prevB = run.utilities();
      }
    }
  }
}

TEST_CASE("online contract: a prefix's allocations ignore the suffix") {
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 32;
  const ArrivalSequence base = sample_sequence(d, T, SeedSpec{11, 0});
  const int64_t prefix = 17;
  for (PolicyKind kind : {PolicyKind::FrequentResolve, PolicyKind::BackwardResolveThreshold}) {
    PolicyRun a(PolicySpec{kind, WelfareParam::egalitarian(), 1.05}, d, T);
    PolicyRun b(PolicySpec{kind, WelfareParam::egalitarian(), 1.05}, d, T);
    std::vector<Eigen::VectorXd> xa, xb;
    for (int64_t t = 0; t < T; ++t) {
      xa.push_back(a.step(base[size_t(t)]));
      // Same prefix, complemented suffix.
      const int32_t arrival =
          t < prefix ? base[size_t(t)] : int32_t(1 - base[size_t(t)]);
      xb.push_back(b.step(arrival));
    }
    for (int64_t t = 0; t < prefix; ++t) CHECK(xa[size_t(t)] == xb[size_t(t)]);
    CHECK(xa[size_t(prefix)] != xb[size_t(prefix)]);  // suffixes do differ
  }
}

TEST_CASE("BIRT with zeroed thresholds reproduces BIR exactly") {
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 64;
  ResolveSchedule sched = make_schedule(T, 1.25, 2);
  for (double& g : sched.thresholds) g = 0.0;
  const ArrivalSequence seq = sample_sequence(d, T, SeedSpec{12, 3});
  PolicyRun bir(PolicySpec{PolicyKind::BackwardResolve, WelfareParam::egalitarian(), 1.25},
                d, T, sched);
  PolicyRun birt(
      PolicySpec{PolicyKind::BackwardResolveThreshold, WelfareParam::egalitarian(), 1.25},
      d, T, sched);
  for (int32_t b : seq) {
    const Eigen::VectorXd xa = bir.step(b);
    const Eigen::VectorXd xb = birt.step(b);
    CHECK(xa == xb);
  }
}

TEST_CASE("BIRT working policy respects the epoch threshold") {
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 256;
  PolicyRun run(
      PolicySpec{PolicyKind::BackwardResolveThreshold, WelfareParam::egalitarian(), 1.05},
      d, T);
  const ResolveSchedule& sched = run.schedule();
  const ArrivalSequence seq = sample_sequence(d, T, SeedSpec{13, 1});
  size_t epoch_idx = 0;  // index of the most recent epoch at or before t
  for (int64_t t = 0; t < T; ++t) {
    while (epoch_idx + 1 < sched.epochs.size() && sched.epochs[epoch_idx + 1] <= t)
      ++epoch_idx;
    run.step(seq[size_t(t)]);
    const double gamma = sched.thresholds[epoch_idx];
    const StaticPolicy& xi = run.policy();
    for (Eigen::Index l = 0; l < xi.rows(); ++l)
      for (Eigen::Index i = 0; i < xi.cols(); ++i) {
        const double v = xi(l, i);
        CHECK((v <= 1e-12 || v >= gamma - 1e-9));
      }
  }
}

TEST_CASE("small horizons collapse BIR and BIRT to the fluid policy") {
  const ArrivalDistribution d = cross(0.4);
  for (int64_t T : {1, 2, 3}) {
    PolicyRun f(PolicySpec{PolicyKind::Fluid, WelfareParam::egalitarian(), 1.05}, d, T);
    PolicyRun birt(
        PolicySpec{PolicyKind::BackwardResolveThreshold, WelfareParam::egalitarian(), 1.05},
        d, T);
    const ArrivalSequence seq = sample_sequence(d, T, SeedSpec{14, 0});
    for (int32_t b : seq) CHECK(f.step(b) == birt.step(b));
    CHECK(birt.solves() == 1);
  }
}

TEST_CASE("stepping past the horizon or with a bad type is rejected") {
  const ArrivalDistribution d = cross(0.5);
  PolicyRun run(PolicySpec{PolicyKind::Fluid, WelfareParam::egalitarian(), 1.05}, d, 1);
  CHECK_NOTHROW(run.step(0));
  CHECK_THROWS_AS(run.step(0), std::logic_error);
  PolicyRun run2(PolicySpec{PolicyKind::Fluid, WelfareParam::egalitarian(), 1.05}, d, 4);
  CHECK_THROWS_AS(run2.step(2), std::out_of_range);
  CHECK_THROWS_AS(run2.step(-1), std::out_of_range);
}

TEST_CASE("injected schedules are validated") {
  const ArrivalDistribution d = cross(0.5);
  ResolveSchedule bad = make_schedule(16, 1.25, 2);
  bad.epochs[0] = 1;  // schedule must start at zero
  CHECK_THROWS_AS(
      PolicyRun(PolicySpec{PolicyKind::BackwardResolve, WelfareParam::egalitarian(), 1.25},
                d, 16, bad),
      std::invalid_argument);
  ResolveSchedule ragged = make_schedule(16, 1.25, 2);
  ragged.thresholds.pop_back();
  CHECK_THROWS_AS(
      PolicyRun(PolicySpec{PolicyKind::BackwardResolve, WelfareParam::egalitarian(), 1.25},
                d, 16, ragged),
      std::invalid_argument);
}

TEST_CASE("unequal type probabilities shift the fluid split") {
  // Tilted cross instance: the fluid optimum is the unique-basis vertex.
  const ArrivalDistribution d = cross(0.4);
  const int64_t T = 15;
  PolicyRun run(PolicySpec{PolicyKind::Fluid, WelfareParam::egalitarian(), 1.05}, d, T);
  CHECK(run.policy()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(run.policy()(1, 0) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(run.policy()(1, 1) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
}
