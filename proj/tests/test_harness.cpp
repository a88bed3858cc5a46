#include "mupir/harness.hpp"

#include "mupir/constructions.hpp"

#include "doctest.h"

using namespace mupir;

namespace {

ExperimentPlan exhaustive_plan(int servers, int files, Pda pda,
                               std::uint64_t seed = 1) {
  ExperimentPlan plan;
  plan.config = SystemConfig{servers, files, seed, std::move(pda)};
  plan.mode = ExperimentPlan::Mode::exhaustive;
  return plan;
}

}  // namespace

TEST_CASE("exhaustive enumeration reproduces the closed-form rate") {
  struct Case {
    int servers;
    int files;
    Pda pda;
  };
  std::vector<Case> cases = {
      {2, 2, parse_pda("2 2 1 1\n* 1\n1 *\n")},
      {2, 2, example_pdas().at("trivial")},
      {3, 2, example_pdas().at("trivial")},
      {2, 2, example_pdas().at("regular")},
      {3, 2, single_user_pda(3, 1)},
      {2, 2, man_pda(3, 1)},
      {2, 3, man_pda(3, 2)},
  };
  for (auto& c : cases) {
    CAPTURE(c.servers);
    CAPTURE(c.files);
    CAPTURE(c.pda.users());
    RateEstimate est = estimate_rate(exhaustive_plan(c.servers, c.files, c.pda));
    CHECK(est.exhaustive);
    CHECK(est.matches_analytic);
    CHECK(est.exact_total == est.analytic_total);
    CHECK(est.exact_server0 == est.analytic_server0);
  }
}

TEST_CASE("the 2x2 instance enumerates to 7/8 total and 3/8 at server 0") {
  ExperimentPlan plan = exhaustive_plan(2, 2, parse_pda("2 2 1 1\n* 1\n1 *\n"));
  RateEstimate est = estimate_rate(plan);
  CHECK(est.realizations == 4);
  CHECK(est.exact_total == Rat(7, 8));
  CHECK(est.exact_server0 == Rat(3, 8));
  // All servers except 0 transmit the full S/(F(B-1)) share.
  CHECK(est.mean_per_server.size() == 2);
  CHECK(est.mean_per_server[1] == 0.5);
}

TEST_CASE("the exhaustive mean does not depend on the demand vector") {
  ExperimentPlan plan = exhaustive_plan(2, 2, example_pdas().at("regular"));
  RateEstimate base = estimate_rate(plan);
  plan.demands = std::vector<int>{1, 0, 1, 0, 1, 0};
  RateEstimate other = estimate_rate(plan);
  CHECK(base.exact_total == other.exact_total);
  CHECK(base.exact_server0 == other.exact_server0);
}

TEST_CASE("enumeration respects the realization cap") {
  ExperimentPlan plan = exhaustive_plan(2, 3, example_pdas().at("regular"));
  plan.exhaustive_cap = 1000;  // 2^12 realizations exceed this
  CHECK_THROWS_AS(estimate_rate(plan), std::invalid_argument);
  plan.exhaustive_cap = 1 << 12;
  CHECK_NOTHROW(estimate_rate(plan));
}

TEST_CASE("monte carlo estimates concentrate around the closed form") {
  ExperimentPlan plan;
  plan.config = SystemConfig{2, 2, 99, example_pdas().at("regular")};
  plan.trials = 400;
  RateEstimate small = estimate_rate(plan);
  CHECK(!small.exhaustive);
  CHECK(small.half_width_95 > 0);
  CHECK(std::abs(small.mean_total - to_double(small.analytic_total)) <=
        4 * small.half_width_95);

  plan.trials = 6400;
  RateEstimate large = estimate_rate(plan);
  // Quadrupling twice should shrink the interval by about 4x; accept any
  // strict improvement to keep the check robust.
  CHECK(large.half_width_95 < small.half_width_95);
  CHECK(std::abs(large.mean_total - to_double(large.analytic_total)) <=
        4 * large.half_width_95);

  RateEstimate again = estimate_rate(plan);
  CHECK(again.mean_total == large.mean_total);  // seeded determinism
  CHECK(again.half_width_95 == large.half_width_95);

  plan.trials = 0;
  CHECK_THROWS_AS(estimate_rate(plan), std::invalid_argument);
}

TEST_CASE("exact privacy audit sees a uniform demand-independent joint") {
  struct Case {
    int servers;
    int files;
    Pda pda;
    std::vector<std::vector<int>> demands;
  };
  std::vector<Case> cases = {
      {2, 2, parse_pda("2 2 1 1\n* 1\n1 *\n"), {{0, 0}, {1, 1}, {0, 1}}},
      {3, 2, example_pdas().at("trivial"), {{0}, {1}}},
      {2, 2, example_pdas().at("regular"),
       {{0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1}, {0, 1, 0, 1, 0, 1}}},
      {3, 2, single_user_pda(2, 1), {{0}, {1}}},
  };
  for (auto& c : cases) {
    CAPTURE(c.servers);
    CAPTURE(c.pda.users());
    SystemConfig config{c.servers, c.files, 3, c.pda};
    PrivacyReport rep = privacy_audit_exact(config, c.demands);
    CHECK(rep.method == PrivacyReport::Method::exact);
    CHECK(!rep.flagged);
    CHECK(rep.uniform_ok);
    CHECK(rep.max_tv_exact == 0);
  }
}

TEST_CASE("exact audit input validation") {
  SystemConfig config{2, 2, 3, example_pdas().at("regular")};
  std::vector<int> d0(6, 0), d1(6, 1);
  CHECK_THROWS_AS(privacy_audit_exact(config, {d0}), std::invalid_argument);
  CHECK_THROWS_AS(privacy_audit_exact(config, {d0, d0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(privacy_audit_exact(config, {d0, {9, 0, 0, 0, 0, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(privacy_audit_exact(config, {d0, {0, 1}}),
                  std::invalid_argument);
  // Cap: K(N-1) = 6 base-2 digits = 64 realizations.
  CHECK_THROWS_AS(privacy_audit_exact(config, {d0, d1}, 32),
                  std::invalid_argument);
  CHECK_NOTHROW(privacy_audit_exact(config, {d0, d1}, 64));
}

TEST_CASE("empirical audit passes the shipped builder and catches the leak") {
  SystemConfig config{2, 2, 2024, example_pdas().at("regular")};
  std::vector<std::vector<int>> demands = {{0, 0, 0, 0, 0, 0},
                                           {1, 1, 1, 1, 1, 1}};
  PrivacyReport good = privacy_audit_empirical(config, demands, 4000);
  CHECK(good.method == PrivacyReport::Method::empirical);
  CHECK(!good.flagged);
  CHECK(good.min_p_value > 1e-6);
  CHECK(!good.marginals_only);  // joint domain 2^6 = 64

  PrivacyReport leak = privacy_audit_empirical(config, demands, 4000, true);
  CHECK(leak.flagged);
  CHECK(leak.min_p_value < 1e-6);

  CHECK_THROWS_AS(privacy_audit_empirical(config, demands, 999),
                  std::invalid_argument);
}

TEST_CASE("empirical audit falls back to per-user marginals") {
  // K(N-1) = 12 base-3 digits: joint domain 3^12 >> 4096, per-user 3^2 = 9.
  SystemConfig config{3, 3, 11, example_pdas().at("regular")};
  std::vector<std::vector<int>> demands = {{0, 1, 2, 0, 1, 2},
                                           {2, 1, 0, 2, 1, 0}};
  PrivacyReport rep = privacy_audit_empirical(config, demands, 2000);
  CHECK(rep.marginals_only);
  CHECK(!rep.flagged);

  PrivacyReport leak = privacy_audit_empirical(config, demands, 2000, true);
  CHECK(leak.flagged);
}

TEST_CASE("audits are deterministic for a fixed seed") {
  SystemConfig config{2, 2, 5, example_pdas().at("regular")};
  std::vector<std::vector<int>> demands = {{0, 0, 0, 0, 0, 0},
                                           {1, 0, 1, 0, 1, 0}};
  PrivacyReport a = privacy_audit_empirical(config, demands, 2000);
  PrivacyReport b = privacy_audit_empirical(config, demands, 2000);
  CHECK(a.max_tv == b.max_tv);
  CHECK(a.min_p_value == b.min_p_value);
}

TEST_CASE("regression suite is green") {
  std::vector<RegressionResult> results = regression_suite();
  CHECK(results.size() >= 12);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CHECK(r.pass);
    if (!r.pass) MESSAGE(r.detail);
  }
  CHECK(all_passed(results));
  std::vector<RegressionResult> again = regression_suite();
  REQUIRE(again.size() == results.size());
  for (std::size_t i = 0; i < again.size(); ++i)
    CHECK(again[i].name == results[i].name);
}
