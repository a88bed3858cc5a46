#include "mupir/harness.hpp"

#include "mupir/constructions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mupir {

namespace {

// Steps a flat base-B odometer; returns false once it wraps back to zero.
bool advance_digits(std::vector<int>& digits, int base) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < base) return true;
    digits[i] = 0;
  }
  return false;
}

std::vector<std::vector<int>> digits_to_v(const std::vector<int>& digits,
                                          int users, int per_user) {
  std::vector<std::vector<int>> v(users);
  for (int k = 0; k < users; ++k)
    v[k].assign(digits.begin() + static_cast<std::ptrdiff_t>(k) * per_user,
                digits.begin() + static_cast<std::ptrdiff_t>(k + 1) * per_user);
  return v;
}

int count_present(const std::vector<char>& present) {
  return static_cast<int>(std::count(present.begin(), present.end(), 1));
}

void check_demand_vector(const SystemConfig& config,
                         const std::vector<int>& d) {
  if (static_cast<int>(d.size()) != config.users())
    throw std::invalid_argument("demand vector length != K");
  for (int x : d)
    if (x < 0 || x >= config.files)
      throw std::invalid_argument("demand outside [0:N-1]");
}

}  // namespace

RateEstimate estimate_rate(const ExperimentPlan& plan) {
  const SystemConfig& config = plan.config;
  config.check();
  const int B = config.servers;
  const int N = config.files;
  const int K = config.users();
  const int F = config.pda.subfiles();
  // One unit = one coded packet = L/(F(B-1)).
  const Int units_per_file = Int(F) * (B - 1);

  RateEstimate est;
  est.analytic_total = pda_scheme_metrics(config.pda, B, N).rate_raw;
  est.analytic_server0 = pda_server0_mean_rate(config.pda, B, N);

  if (plan.mode == ExperimentPlan::Mode::exhaustive) {
    if (plan.demands) check_demand_vector(config, *plan.demands);
    const std::vector<int> demands =
        plan.demands ? *plan.demands : std::vector<int>(K, 0);
    const int digit_count = K * (N - 1);
    const Int domain = int_pow(B, digit_count);
    if (domain > plan.exhaustive_cap)
      throw std::invalid_argument(
          "exhaustive domain B^(K(N-1)) = " + domain.str() +
          " exceeds the cap; use monte_carlo");

    est.exhaustive = true;
    std::vector<unsigned long long> units(B, 0);
    std::vector<int> digits(digit_count, 0);
    std::size_t count = 0;
    do {
      QuerySet qs =
          build_queries(config, demands, digits_to_v(digits, K, N - 1));
      for (int b = 0; b < B; ++b)
        units[b] += count_present(answer_presence(config, b, qs));
      ++count;
    } while (advance_digits(digits, B));

    est.realizations = count;
    const Int denom = Int(count) * units_per_file;
    Int total = 0;
    for (int b = 0; b < B; ++b) {
      total += units[b];
      est.mean_per_server.push_back(to_double(Rat(Int(units[b]), denom)));
    }
    est.exact_total = Rat(total, denom);
    est.exact_server0 = Rat(Int(units[0]), denom);
    est.mean_total = to_double(est.exact_total);
    est.matches_analytic = est.exact_total == est.analytic_total &&
                           est.exact_server0 == est.analytic_server0;
    return est;
  }

  if (plan.trials < 1)
    throw std::invalid_argument("monte_carlo needs at least one trial");
  if (plan.demands) check_demand_vector(config, *plan.demands);
  est.realizations = plan.trials;
  est.mean_per_server.assign(B, 0.0);
  const double upf = to_double(Rat(units_per_file, 1));
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < plan.trials; ++i) {
    const std::vector<int> demands =
        plan.demands ? *plan.demands : gen_demands(config, i);
    QuerySet qs = gen_queries(config, demands, i);
    double x = 0.0;
    for (int b = 0; b < B; ++b) {
      double rb = count_present(answer_presence(config, b, qs)) / upf;
      est.mean_per_server[b] += rb;
      x += rb;
    }
    sum += x;
    sumsq += x * x;
  }
  const double n = static_cast<double>(plan.trials);
  est.mean_total = sum / n;
  for (double& m : est.mean_per_server) m /= n;
  if (plan.trials > 1) {
    double var = (sumsq - n * est.mean_total * est.mean_total) / (n - 1);
    est.half_width_95 = 1.96 * std::sqrt(std::max(var, 0.0) / n);
  }
  return est;
}

namespace {

// Canonical position of a query inside the sum-constrained set for its
// server: read the first N-1 symbols as a base-B number. The dropped
// coordinate is implied, and the map does not depend on the demand.
std::size_t query_index(const Query& q, int servers) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i + 1 < q.symbols.size(); ++i)
    idx = idx * servers + q.symbols[i];
  return idx;
}

std::uint64_t demand_fingerprint(const std::vector<int>& d) {
  std::uint64_t h = 1469598103934665603ull;
  for (int x : d) {
    h ^= static_cast<std::uint64_t>(x) + 0x9E3779B97F4A7C15ull;
    h *= 1099511628211ull;
  }
  return h;
}

void check_demand_list(const SystemConfig& config,
                       const std::vector<std::vector<int>>& demands) {
  if (demands.size() < 2)
    throw std::invalid_argument("audit needs at least two demand vectors");
  for (const auto& d : demands) check_demand_vector(config, d);
  bool distinct = false;
  for (std::size_t i = 1; i < demands.size() && !distinct; ++i)
    distinct = demands[i] != demands[0];
  if (!distinct)
    throw std::invalid_argument("audit needs two distinct demand vectors");
}

double chi_square_p(const std::vector<std::uint32_t>& hist,
                    std::size_t samples) {
  const double expct = static_cast<double>(samples) / hist.size();
  double stat = 0.0;
  for (std::uint32_t obs : hist) {
    const double diff = obs - expct;
    stat += diff * diff / expct;
  }
  const double df = static_cast<double>(hist.size()) - 1.0;
  if (df <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

double empirical_tv(const std::vector<std::uint32_t>& a,
                    const std::vector<std::uint32_t>& b, std::size_t samples) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return sum / (2.0 * static_cast<double>(samples));
}

}  // namespace

PrivacyReport privacy_audit_exact(const SystemConfig& config,
                                  const std::vector<std::vector<int>>& demands,
                                  std::size_t cap) {
  config.check();
  check_demand_list(config, demands);
  const int B = config.servers;
  const int N = config.files;
  const int K = config.users();
  const int digit_count = K * (N - 1);
  const Int domain = int_pow(B, digit_count);
  if (domain > cap)
    throw std::invalid_argument("joint domain B^(K(N-1)) = " + domain.str() +
                                " exceeds the cap; use the empirical audit");
  const std::size_t domain_sz = domain.convert_to<std::size_t>();
  const std::size_t user_domain = int_pow(B, N - 1).convert_to<std::size_t>();

  PrivacyReport report;
  report.method = PrivacyReport::Method::exact;
  report.max_tv_exact = 0;

  // hist[b][d] counts joint query tuples over all randomness realizations.
  std::vector<std::vector<std::vector<std::uint32_t>>> hist(
      B, std::vector<std::vector<std::uint32_t>>(
             demands.size(), std::vector<std::uint32_t>(domain_sz, 0)));

  std::vector<int> digits(digit_count, 0);
  std::size_t realizations = 0;
  do {
    auto v = digits_to_v(digits, K, N - 1);
    for (std::size_t di = 0; di < demands.size(); ++di) {
      QuerySet qs = build_queries(config, demands[di], v);
      for (int b = 0; b < B; ++b) {
        std::size_t joint = 0;
        for (int k = 0; k < K; ++k)
          joint = joint * user_domain + query_index(qs.of(k, b), B);
        ++hist[b][di][joint];
      }
    }
    ++realizations;
  } while (advance_digits(digits, B));

  std::ostringstream detail;
  for (int b = 0; b < B; ++b) {
    for (std::size_t di = 0; di < demands.size(); ++di)
      for (std::size_t idx = 0; idx < domain_sz; ++idx)
        if (hist[b][di][idx] != 1) {
          if (report.uniform_ok)
            detail << "server " << b << ": joint tuple " << idx << " seen "
                   << hist[b][di][idx] << " times; ";
          report.uniform_ok = false;
        }
    for (std::size_t d1 = 0; d1 < demands.size(); ++d1)
      for (std::size_t d2 = d1 + 1; d2 < demands.size(); ++d2) {
        Int l1 = 0;
        for (std::size_t idx = 0; idx < domain_sz; ++idx) {
          long diff = static_cast<long>(hist[b][d1][idx]) -
                      static_cast<long>(hist[b][d2][idx]);
          l1 += diff < 0 ? -diff : diff;
        }
        Rat tv = Rat(l1, 2 * Int(realizations));
        report.max_tv_exact = std::max(report.max_tv_exact, tv);
      }
  }
  report.flagged = !report.uniform_ok || report.max_tv_exact != 0;
  if (report.flagged && detail.str().empty())
    detail << "query distribution differs across demands";
  report.detail = detail.str();
  return report;
}

PrivacyReport privacy_audit_empirical(
    const SystemConfig& config, const std::vector<std::vector<int>>& demands,
    std::size_t samples, bool use_leaky_builder) {
  config.check();
  check_demand_list(config, demands);
  if (samples < 1000)
    throw std::invalid_argument("empirical audit needs at least 1000 samples");
  const int B = config.servers;
  const int N = config.files;
  const int K = config.users();

  PrivacyReport report;
  report.method = PrivacyReport::Method::empirical;
  report.samples = samples;

  const Int joint_domain = int_pow(B, K * (N - 1));
  report.marginals_only = joint_domain > 4096;
  const std::size_t user_domain = int_pow(B, N - 1).convert_to<std::size_t>();
  if (report.marginals_only && user_domain > 65536)
    throw std::invalid_argument(
        "per-user domain B^(N-1) too large to tabulate");

  // Joint mode: hist[b][d] over the joint domain. Marginal mode:
  // hist[b][d*K + k] over each user's own domain.
  const std::size_t cells = report.marginals_only ? demands.size() * K
                                                  : demands.size();
  const std::size_t width = report.marginals_only
                                ? user_domain
                                : joint_domain.convert_to<std::size_t>();
  std::vector<std::vector<std::vector<std::uint32_t>>> hist(
      B, std::vector<std::vector<std::uint32_t>>(
             cells, std::vector<std::uint32_t>(width, 0)));

  for (std::size_t di = 0; di < demands.size(); ++di) {
    SystemConfig local = config;
    // Distinct demand vectors draw independent randomness streams, so the
    // cross-demand comparison is not a trivially paired one.
    local.seed = config.seed ^ demand_fingerprint(demands[di]);
    for (std::size_t i = 0; i < samples; ++i) {
      QuerySet qs = use_leaky_builder
                        ? gen_queries_leaky(local, demands[di])
                        : gen_queries(local, demands[di], i);
      for (int b = 0; b < B; ++b) {
        if (report.marginals_only) {
          for (int k = 0; k < K; ++k)
            ++hist[b][di * K + k][query_index(qs.of(k, b), B)];
        } else {
          std::size_t joint = 0;
          for (int k = 0; k < K; ++k)
            joint = joint * user_domain + query_index(qs.of(k, b), B);
          ++hist[b][di][joint];
        }
      }
    }
  }

  std::ostringstream detail;
  for (int b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < cells; ++c) {
      double p = chi_square_p(hist[b][c], samples);
      report.min_p_value = std::min(report.min_p_value, p);
      if (p < 1e-6 && !report.flagged) {
        report.flagged = true;
        detail << "server " << b << ": query histogram far from uniform"
               << " (p = " << p << ")";
      }
    }
    // Worst pairwise distance between demand vectors.
    const std::size_t per_demand = report.marginals_only ? K : 1;
    for (std::size_t d1 = 0; d1 < demands.size(); ++d1)
      for (std::size_t d2 = d1 + 1; d2 < demands.size(); ++d2)
        for (std::size_t u = 0; u < per_demand; ++u)
          report.max_tv = std::max(
              report.max_tv, empirical_tv(hist[b][d1 * per_demand + u],
                                          hist[b][d2 * per_demand + u],
                                          samples));
  }
  report.detail = detail.str();
  return report;
}

namespace {

using CheckFn = std::function<void(std::ostringstream&)>;

void run_check(std::vector<RegressionResult>& out, const std::string& name,
               const CheckFn& fn) {
  RegressionResult r;
  r.name = name;
  std::ostringstream detail;
  try {
    fn(detail);
    r.pass = true;
  } catch (const std::exception& e) {
    r.pass = false;
    detail << (detail.str().empty() ? "" : "; ") << e.what();
  }
  r.detail = detail.str();
  out.push_back(r);
}

void expect(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

// Hand-worked delivery round used by several checks: the 3-regular 6-user
// array, B = 3 servers, N = 6 files, fixed per-user randomness.
struct WorkedRound {
  SystemConfig config;
  std::vector<int> demands = {3, 1, 0, 4, 5, 1};
  std::vector<std::vector<int>> v = {{1, 0, 1, 2, 0}, {0, 1, 1, 0, 1},
                                     {1, 2, 2, 0, 2}, {0, 0, 1, 2, 2},
                                     {0, 0, 1, 0, 2}, {0, 1, 0, 1, 0}};
  // queries[k][b], written out as sent.
  std::vector<std::vector<std::vector<int>>> queries = {
      {{1, 0, 1, 2, 2, 0}, {1, 0, 1, 0, 2, 0}, {1, 0, 1, 1, 2, 0}},
      {{0, 0, 1, 1, 0, 1}, {0, 1, 1, 1, 0, 1}, {0, 2, 1, 1, 0, 1}},
      {{2, 1, 2, 2, 0, 2}, {0, 1, 2, 2, 0, 2}, {1, 1, 2, 2, 0, 2}},
      {{0, 0, 1, 2, 1, 2}, {0, 0, 1, 2, 2, 2}, {0, 0, 1, 2, 0, 2}},
      {{0, 0, 1, 0, 2, 0}, {0, 0, 1, 0, 2, 1}, {0, 0, 1, 0, 2, 2}},
      {{0, 1, 1, 0, 1, 0}, {0, 2, 1, 0, 1, 0}, {0, 0, 1, 0, 1, 0}}};

  WorkedRound()
      : config{3, 6, 977, example_pdas().at("regular")} {}
};

}  // namespace

std::vector<RegressionResult> regression_suite() {
  std::vector<RegressionResult> out;

  run_check(out, "irregular catalog array shape and occupancy", [](auto&) {
    const Pda& p = example_pdas().at("irregular");
    expect(validate(p).valid(), "array does not validate");
    expect(p.users() == 8 && p.subfiles() == 6 && p.stars_per_column() == 3 &&
               p.label_count() == 11,
           "parameters != (8,6,3,11)");
    OccupancyMap occ = occupancy(p);
    const std::vector<std::vector<int>> want = {
        {1, 4, 6}, {2, 5, 7}, {3}, {1, 4, 8}, {2, 5, 8}, {3},
        {1, 6},    {2, 7},    {3}, {4, 6, 8}, {5, 7}};
    for (int s = 1; s <= 11; ++s)
      expect(occ.of(s) == want[s - 1],
             "occupancy of label " + std::to_string(s) + " wrong");
    expect(!regularity(p).has_value(), "array should not be regular");
    expect(caching_ratio(p) == Rat(1, 2), "cache fraction != 1/2");
  });

  run_check(out, "regular catalog array is 3-regular (6,4,2,4)", [](auto&) {
    const Pda& p = example_pdas().at("regular");
    expect(validate(p).valid(), "array does not validate");
    expect(p.users() == 6 && p.subfiles() == 4 && p.stars_per_column() == 2 &&
               p.label_count() == 4,
           "parameters != (6,4,2,4)");
    expect(regularity(p) == std::optional<int>(3), "regularity != 3");
  });

  run_check(out, "trivial catalog array is (1,1,0,1)", [](auto&) {
    const Pda& p = example_pdas().at("trivial");
    expect(validate(p).valid() && p.users() == 1 && p.subfiles() == 1 &&
               p.stars_per_column() == 0 && p.label_count() == 1,
           "parameters != (1,1,0,1)");
  });

  run_check(out, "query builder reproduces hand-worked batch", [](auto&) {
    WorkedRound w;
    QuerySet qs = build_queries(w.config, w.demands, w.v);
    for (int k = 0; k < 6; ++k)
      for (int b = 0; b < 3; ++b)
        expect(qs.of(k, b).symbols == w.queries[k][b],
               "query of user " + std::to_string(k + 1) + " to server " +
                   std::to_string(b) + " differs");
  });

  run_check(out, "server answer matches hand-worked coded packet", [](auto&) {
    WorkedRound w;
    FileSet files = FileSet::seeded_random(6, 64, 4, 3, 11);
    QuerySet qs = build_queries(w.config, w.demands, w.v);
    std::vector<Query> batch;
    for (int k = 0; k < 6; ++k) batch.push_back(qs.of(k, 0));
    Broadcast bc = server_answer(w.config, files, 0, batch);
    expect(bc.present[0] == 1, "label 1 should be present");

    // Label-1 cells are (row 3, user 3), (row 2, user 2), (row 1, user 1)
    // in 1-based terms; accumulate their sums from the published queries.
    Bytes manual(files.packet_bytes(), 0);
    const std::vector<std::pair<int, int>> cells = {{0, 2}, {1, 1}, {2, 0}};
    for (auto [f, k] : cells)
      for (int n = 0; n < 6; ++n)
        files.xor_packet(manual, n, f, w.queries[k][0][n]);
    expect(bc.packets[0] == manual, "coded packet differs from hand XOR");
  });

  run_check(out, "hand-worked round downloads exactly 3L/2", [](auto&) {
    WorkedRound w;
    FileSet files = FileSet::seeded_random(6, 64, 4, 3, 12);
    RoundTranscript t = run_round_with_v(w.config, files, w.demands, w.v);
    expect(t.all_ok(), "some user failed to decode");
    const Int l_bits = Int(files.padded_bytes()) * 8;
    expect(Rat(Int(t.total_download_bits()), l_bits) == Rat(3, 2),
           "download != 1.5L");
    expect(t.upload_symbols == 90 && t.upload_symbol_base == 3,
           "upload != 90 base-3 symbols");
    expect(pda_scheme_metrics(w.config.pda, 3, 6).subpacketization == 8,
           "subpacketization != 8");
  });

  run_check(out, "suppression saves one packet when first three users sit out",
            [](auto&) {
              WorkedRound w;
              for (int k = 0; k < 3; ++k) w.v[k].assign(5, 0);
              FileSet files = FileSet::seeded_random(6, 64, 4, 3, 13);
              RoundTranscript t =
                  run_round_with_v(w.config, files, w.demands, w.v);
              expect(t.all_ok(), "some user failed to decode");
              expect(t.broadcasts[0].present ==
                         std::vector<char>({0, 1, 1, 1}),
                     "only label 1 should be dropped");
              const Int l_bits = Int(files.padded_bytes()) * 8;
              expect(Rat(Int(t.total_download_bits()), l_bits) == Rat(11, 8),
                     "download != 11L/8");
            });

  run_check(out, "irregular array rate close to 3.663", [](auto&) {
    SchemeMetrics m = pda_scheme_metrics(example_pdas().at("irregular"), 2, 8);
    expect(std::abs(to_double(m.rate) - 3.663) <= 1e-3,
           "rate " + float_str(to_double(m.rate)) + " not within 1e-3");
    expect(m.upload.count == 112 && m.upload.log2_base == 1.0,
           "upload != 112 bits");
    expect(m.subpacketization == 6, "subpacketization != 6");
  });

  run_check(out, "regular array rate exactly (3 - 3^-15)/2", [](auto&) {
    SchemeMetrics m = pda_scheme_metrics(example_pdas().at("regular"), 3, 6);
    expect(m.rate == Rat(21523360, 14348907), "rate mismatch");
    expect(m.rate == regular_pda_rate(3, 4, 4, 3, 6), "regular shortcut");
    expect(pda_server0_mean_rate(example_pdas().at("regular"), 3, 6) ==
               Rat(7174453, 14348907),
           "server-0 expectation != (1 - 3^-15)/2");
  });

  run_check(out, "exhaustive mean on the 2x2 array equals 7/8", [](auto&) {
    ExperimentPlan plan;
    plan.config = {2, 2, 1, parse_pda("2 2 1 1\n* 1\n1 *\n")};
    plan.mode = ExperimentPlan::Mode::exhaustive;
    RateEstimate est = estimate_rate(plan);
    expect(est.realizations == 4, "expected 4 realizations");
    expect(est.exact_total == Rat(7, 8), "mean total != 7/8");
    expect(est.exact_server0 == Rat(3, 8), "server-0 mean != 3/8");
    expect(est.matches_analytic, "enumeration disagrees with closed form");
  });

  run_check(out, "single-user column matches the product-form rate", [](auto&) {
    SchemeMetrics m = pda_scheme_metrics(single_user_pda(4, 2), 3, 5);
    expect(m.rate_raw == (1 - Rat(2, 4)) * pir_series_sum(3, 4),
           "rate != (1 - Z/F) * geometric sum");
  });

  run_check(out, "trivial array yields the plain PIR rate", [](auto&) {
    SchemeMetrics m = pda_scheme_metrics(example_pdas().at("trivial"), 2, 2);
    expect(m.rate == Rat(3, 2), "rate != 3/2");
  });

  run_check(out, "uncoded fallback downloads exactly N - M", [](auto&) {
    WorkedRound w;
    FileSet files = FileSet::seeded_random(6, 64, 4, 3, 14);
    RoundTranscript t = run_round_uncoded(w.config, files, w.demands);
    expect(t.all_ok(), "some user failed to decode");
    const Int l_bits = Int(files.padded_bytes()) * 8;
    expect(Rat(Int(t.total_download_bits()), l_bits) == 3, "download != 3L");
  });

  return out;
}

bool all_passed(const std::vector<RegressionResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const RegressionResult& r) { return r.pass; });
}

}  // namespace mupir
