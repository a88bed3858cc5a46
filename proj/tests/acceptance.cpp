// Acceptance harness: every criterion below runs against the library through
// its public interface and prints one [PASS]/[FAIL] line with its runtime.
// The process exits nonzero if any criterion fails.
#include "mupir/constructions.hpp"
#include "mupir/harness.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

using namespace mupir;

namespace {

void expect(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

std::string fmt_rat(const Rat& r) { return rat_str(r); }

// ---- criterion bodies ----

void c1_validation() {
  const Pda& irr = example_pdas().at("irregular");
  expect(validate(irr).valid(), "irregular array fails validation");
  expect(irr.users() == 8 && irr.subfiles() == 6 &&
             irr.stars_per_column() == 3 && irr.label_count() == 11,
         "irregular parameters are not (8,6,3,11)");
  OccupancyMap occ = occupancy(irr);
  const std::vector<std::vector<int>> expected = {
      {1, 4, 6}, {2, 5, 7}, {3}, {1, 4, 8}, {2, 5, 8}, {3},
      {1, 6},    {2, 7},    {3}, {4, 6, 8}, {5, 7}};
  for (int s = 1; s <= 11; ++s)
    expect(occ.of(s) == expected[s - 1],
           "occupancy of label " + std::to_string(s) + " is wrong");

  const Pda& reg = example_pdas().at("regular");
  expect(validate(reg).valid(), "regular array fails validation");
  expect(reg.users() == 6 && reg.subfiles() == 4 &&
             reg.stars_per_column() == 2 && reg.label_count() == 4,
         "regular parameters are not (6,4,2,4)");
  expect(regularity(reg) == std::optional<int>(3), "regularity is not 3");
}

void c2_rate_formulas() {
  Rat irr = pda_scheme_metrics(example_pdas().at("irregular"), 2, 8).rate;
  expect(std::abs(to_double(irr) - 3.663) <= 1e-3,
         "irregular rate " + float_str(to_double(irr)) +
             " not within 1e-3 of 3.663");
  Rat reg = pda_scheme_metrics(example_pdas().at("regular"), 3, 6).rate;
  Rat want = (Rat(3) - Rat(1, int_pow(3, 15))) / 2;
  expect(reg == want, "regular rate " + fmt_rat(reg) + " != (3 - 3^-15)/2");
}

const std::vector<std::vector<int>> kWorkedV = {
    {1, 0, 1, 2, 0}, {0, 1, 1, 0, 1}, {1, 2, 2, 0, 2},
    {0, 0, 1, 2, 2}, {0, 0, 1, 0, 2}, {0, 1, 0, 1, 0}};
const std::vector<int> kWorkedDemands = {3, 1, 0, 4, 5, 1};

void c3_query_table() {
  SystemConfig config{3, 6, 0, example_pdas().at("regular")};
  QuerySet qs = build_queries(config, kWorkedDemands, kWorkedV);
  const std::vector<std::vector<std::vector<int>>> expected = {
      {{1, 0, 1, 2, 2, 0}, {1, 0, 1, 0, 2, 0}, {1, 0, 1, 1, 2, 0}},
      {{0, 0, 1, 1, 0, 1}, {0, 1, 1, 1, 0, 1}, {0, 2, 1, 1, 0, 1}},
      {{2, 1, 2, 2, 0, 2}, {0, 1, 2, 2, 0, 2}, {1, 1, 2, 2, 0, 2}},
      {{0, 0, 1, 2, 1, 2}, {0, 0, 1, 2, 2, 2}, {0, 0, 1, 2, 0, 2}},
      {{0, 0, 1, 0, 2, 0}, {0, 0, 1, 0, 2, 1}, {0, 0, 1, 0, 2, 2}},
      {{0, 1, 1, 0, 1, 0}, {0, 2, 1, 0, 1, 0}, {0, 0, 1, 0, 1, 0}}};
  for (int k = 0; k < 6; ++k)
    for (int b = 0; b < 3; ++b)
      expect(qs.of(k, b).symbols == expected[k][b],
             "query of user " + std::to_string(k + 1) + " to server " +
                 std::to_string(b) + " differs from the worked table");
}

void c4_end_to_end() {
  std::vector<Pda> arrays = {example_pdas().at("trivial"),
                             example_pdas().at("irregular"),
                             example_pdas().at("regular"),
                             single_user_pda(2, 1),
                             single_user_pda(3, 2),
                             single_user_pda(4, 1),
                             single_user_pda(4, 3)};
  for (int k = 1; k <= 6; ++k)
    for (int t = 0; t <= k; ++t) arrays.push_back(man_pda(k, t));

  const int N = 4;
  const std::size_t L = 4096;
  long rounds_done = 0;
  std::uint64_t seed = 20240817;
  for (const Pda& pda : arrays) {
    for (int B : {2, 3, 4}) {
      SystemConfig config{B, N, seed++, pda};
      FileSet files =
          FileSet::seeded_random(N, L, pda.subfiles(), B, config.seed);
      for (int r = 0; r < 10; ++r) {
        std::vector<int> demands = gen_demands(config, r);
        RoundTranscript t = run_round(config, files, demands, r);
        expect(t.all_ok(), "decode failure on a " + std::to_string(pda.users()) +
                               "-user array with B = " + std::to_string(B));
        ++rounds_done;
      }
    }
  }
  expect(rounds_done >= 1000, "only " + std::to_string(rounds_done) +
                                  " rounds were run, need >= 1000");
}

void c5_download_accounting() {
  SystemConfig config{3, 6, 0, example_pdas().at("regular")};
  FileSet files = FileSet::seeded_random(6, 4096, 4, 3, 9);
  RoundTranscript t = run_round_with_v(config, files, kWorkedDemands, kWorkedV);
  expect(t.all_ok(), "worked round failed to decode");
  const Int l_bits = Int(files.padded_bytes()) * 8;
  Rat ratio(Int(t.total_download_bits()), l_bits);
  expect(ratio == Rat(3, 2),
         "download is " + fmt_rat(ratio) + " L, expected 3/2 L");
  expect(t.upload_symbols == 90 && t.upload_symbol_base == 3,
         "upload is not 90 base-3 symbols");
  expect(std::abs(t.upload_analytic_bits - 90 * std::log2(3.0)) < 1e-9,
         "analytic upload bits are not 90*log2(3)");
  Int subpack =
      pda_scheme_metrics(config.pda, 3, 6).subpacketization;
  expect(subpack == 8, "subpacketization is " + subpack.str() + ", not 8");
}

void c6_rate_oracle() {
  ExperimentPlan plan;
  plan.mode = ExperimentPlan::Mode::exhaustive;
  plan.config = SystemConfig{2, 2, 1, parse_pda("2 2 1 1\n* 1\n1 *\n")};
  RateEstimate first = estimate_rate(plan);
  expect(first.realizations == 4, "2x2 instance should have 4 realizations");
  expect(first.exact_total == Rat(7, 8),
         "2x2 mean is " + fmt_rat(first.exact_total) + ", not 7/8");
  expect(first.exact_server0 == Rat(3, 8),
         "2x2 server-0 mean is " + fmt_rat(first.exact_server0) + ", not 3/8");
  expect(first.matches_analytic, "2x2 enumeration disagrees with closed form");

  struct Case {
    int servers, files;
    Pda pda;
  };
  std::vector<Case> more = {
      {2, 2, example_pdas().at("trivial")},  {3, 2, example_pdas().at("trivial")},
      {2, 2, example_pdas().at("regular")},  {2, 3, example_pdas().at("regular")},
      {3, 2, single_user_pda(3, 1)},         {2, 2, man_pda(3, 1)},
      {2, 3, man_pda(3, 2)},                 {4, 2, man_pda(4, 2)},
      {3, 2, example_pdas().at("irregular")}};
  for (auto& c : more) {
    plan.config = SystemConfig{c.servers, c.files, 1, c.pda};
    RateEstimate est = estimate_rate(plan);
    expect(est.matches_analytic && est.exact_total == est.analytic_total,
           "enumeration disagrees with closed form on a " +
               std::to_string(c.pda.users()) + "-user array, B = " +
               std::to_string(c.servers) + ", N = " + std::to_string(c.files));
  }
}

void c7_privacy() {
  struct Case {
    int servers, files;
    Pda pda;
    std::vector<std::vector<int>> demands;
  };
  std::vector<Case> cases = {
      {2, 2, parse_pda("2 2 1 1\n* 1\n1 *\n"), {{0, 0}, {1, 1}, {0, 1}}},
      {3, 2, example_pdas().at("trivial"), {{0}, {1}}},
      {2, 2, example_pdas().at("regular"),
       {{0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1}}},
      {2, 2, example_pdas().at("irregular"),
       {{0, 1, 0, 1, 0, 1, 0, 1}, {1, 0, 1, 0, 1, 0, 1, 0}}},
      {3, 2, single_user_pda(2, 1), {{0}, {1}}},
      {2, 3, man_pda(3, 1), {{0, 1, 2}, {2, 1, 0}}},
  };
  for (auto& c : cases) {
    SystemConfig config{c.servers, c.files, 77, c.pda};
    PrivacyReport rep = privacy_audit_exact(config, c.demands);
    expect(!rep.flagged && rep.uniform_ok && rep.max_tv_exact == 0,
           "exact audit found leakage on a " + std::to_string(c.pda.users()) +
               "-user array (max TV " + fmt_rat(rep.max_tv_exact) + ")");
  }

  SystemConfig config{2, 2, 31, example_pdas().at("regular")};
  std::vector<std::vector<int>> demands = {{0, 0, 0, 0, 0, 0},
                                           {1, 1, 1, 1, 1, 1}};
  PrivacyReport good = privacy_audit_empirical(config, demands, 100000);
  expect(!good.flagged, "empirical audit flagged the shipped query builder");
  PrivacyReport leak = privacy_audit_empirical(config, demands, 100000, true);
  expect(leak.flagged,
         "empirical audit failed to flag the demand-leaking builder");
}

void c8_code_path_consistency() {
  for (int K = 1; K <= 8; ++K)
    for (int t = 0; t <= K; ++t) {
      Pda pda = man_pda(K, t);
      for (int B : {2, 3})
        for (int N : {2, 4, 8}) {
          SchemeMetrics closed = man_scheme_metrics(K, t, B, N);
          SchemeMetrics built = pda_scheme_metrics(pda, B, N);
          expect(closed.rate == built.rate && closed.rate_raw == built.rate_raw,
                 "closed-form and array rates differ at K=" +
                     std::to_string(K) + " t=" + std::to_string(t) + " B=" +
                     std::to_string(B) + " N=" + std::to_string(N));
          expect(closed.subpacketization == built.subpacketization,
                 "subpacketization differs at K=" + std::to_string(K) +
                     " t=" + std::to_string(t));
        }
    }
  for (const char* name : {"regular", "trivial"}) {
    const Pda& pda = example_pdas().at(name);
    auto g = regularity(pda);
    expect(g.has_value(), std::string(name) + " array should be regular");
    for (int B : {2, 3})
      for (int N : {2, 4, 8})
        expect(regular_pda_rate(*g, pda.label_count(), pda.subfiles(), B, N) ==
                   pda_scheme_metrics(pda, B, N).rate_raw,
               std::string("regular shortcut differs on ") + name);
  }
}

void c9_order_optimality() {
  for (int K = 1; K <= 8; ++K)
    for (int t = 0; t <= K; ++t)
      for (int B : {2, 3})
        for (int N : {2, 4, 8}) {
          OrderOptimalityReport r = order_optimality_check(K, N, B, t);
          expect(r.scheme_rate <= r.caching_rate * r.geometric_bound,
                 "geometric bound fails at K=" + std::to_string(K) + " t=" +
                     std::to_string(t) + " B=" + std::to_string(B) + " N=" +
                     std::to_string(N));
          expect(r.within_geometric_bound && r.within_factor2 &&
                     r.within_factor8,
                 "order-optimality flags fail at K=" + std::to_string(K) +
                     " t=" + std::to_string(t));
        }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

void c10_figure_data() {
  auto rate = parse_csv(emit_figure_data("rate-small"));
  expect(rate.size() == 6, "rate-small should have 5 memory points");
  for (std::size_t i = 1; i < rate.size(); ++i) {
    double pda = std::stod(rate[i][2]);
    double pd = std::stod(rate[i][4]);
    expect(pda >= pd, "array-scheme rate below the baseline at row " +
                          std::to_string(i));
  }
  for (const char* id : {"subpack-ratio", "upload-ratio"}) {
    auto rows = parse_csv(emit_figure_data(id));
    expect(rows.size() >= 3, std::string(id) + " has too few rows");
    double prev = -1.0;
    int prev_users = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      int users = std::stoi(rows[i][1]);
      double ratio = std::stod(rows[i].back());
      expect(users > prev_users,
             std::string(id) + " user counts are not increasing");
      expect(ratio > prev, std::string(id) +
                               " baseline/array ratio is not strictly "
                               "increasing in the user count");
      prev = ratio;
      prev_users = users;
    }
  }
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "array validation and occupancy regression", 1.0, c1_validation},
      {2, "closed-form rate regressions", 1.0, c2_rate_formulas},
      {3, "deterministic query table reproduction", 1.0, c3_query_table},
      {4, "1000+ round end-to-end decode property", 60.0, c4_end_to_end},
      {5, "worked-round download/upload accounting", 1.0,
       c5_download_accounting},
      {6, "exhaustive enumeration equals closed-form rate", 30.0,
       c6_rate_oracle},
      {7, "privacy audits: exact zero TV, mutant flagged", 60.0, c7_privacy},
      {8, "independent code paths agree exactly", 10.0,
       c8_code_path_consistency},
      {9, "order-optimality inequalities", 10.0, c9_order_optimality},
      {10, "figure datasets: ordering properties", 10.0, c10_figure_data},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && elapsed > c.limit_seconds)
      error = "runtime " + float_str(elapsed) + " s exceeds " +
              float_str(c.limit_seconds) + " s";
    const bool pass = error.empty();
    if (!pass) ++failures;
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
              << c.name << " (" << float_str(elapsed) << " s)"
              << (pass ? "" : " -- " + error) << "\n";
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size()
            << " acceptance criteria passed\n";
  return failures == 0 ? 0 : 1;
}
