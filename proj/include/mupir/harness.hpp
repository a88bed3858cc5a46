#pragma once

#include "mupir/analysis.hpp"
#include "mupir/protocol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mupir {

struct ExperimentPlan {
  SystemConfig config;
  enum class Mode { monte_carlo, exhaustive } mode = Mode::monte_carlo;
  std::size_t trials = 1000;                 // monte_carlo only
  std::optional<std::vector<int>> demands;   // absent: fresh uniform per trial
  std::size_t exhaustive_cap = std::size_t{1} << 20;
};

struct RateEstimate {
  bool exhaustive = false;
  std::size_t realizations = 0;
  // Exact values, only meaningful in exhaustive mode.
  Rat exact_total;
  Rat exact_server0;
  // Float summaries, filled in both modes.
  double mean_total = 0.0;
  std::vector<double> mean_per_server;
  double half_width_95 = 0.0;                // monte_carlo only
  // Closed-form counterparts for side-by-side reporting.
  Rat analytic_total;                        // unclamped scheme rate
  Rat analytic_server0;
  bool matches_analytic = false;             // exact == analytic (exhaustive)
};

// Measures the download rate by driving the query/presence machinery, either
// over every randomness realization (exact rationals) or by seeded sampling.
RateEstimate estimate_rate(const ExperimentPlan& plan);

struct PrivacyReport {
  enum class Method { exact, empirical } method = Method::exact;
  bool flagged = false;          // evidence of demand leakage found
  // Exact mode: worst total-variation distance between per-demand query
  // distributions, and whether every joint tuple appeared exactly once.
  Rat max_tv_exact;
  bool uniform_ok = true;
  // Empirical mode.
  double max_tv = 0.0;
  double min_p_value = 1.0;      // worst chi-square p across cells
  std::size_t samples = 0;       // per (server, demand)
  bool marginals_only = false;   // joint domain too big, per-user histograms
  std::string detail;
};

// Enumerates all B^(K(N-1)) randomness realizations and checks that each
// server's joint query tuple is uniform and identical across the supplied
// demand vectors. A correct implementation yields TV exactly 0.
PrivacyReport privacy_audit_exact(const SystemConfig& config,
                                  const std::vector<std::vector<int>>& demands,
                                  std::size_t cap = std::size_t{1} << 20);

// Sampling falsifier for instances too big to enumerate: chi-square against
// the uniform distribution per (server, demand), flagged below p = 1e-6.
// use_leaky_builder swaps in the broken query builder to prove the audit
// can catch a leak.
PrivacyReport privacy_audit_empirical(
    const SystemConfig& config, const std::vector<std::vector<int>>& demands,
    std::size_t samples, bool use_leaky_builder = false);

struct RegressionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fixed checks against hand-worked protocol rounds and closed-form values.
std::vector<RegressionResult> regression_suite();
bool all_passed(const std::vector<RegressionResult>& results);

}  // namespace mupir
