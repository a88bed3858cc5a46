#pragma once

#include "mupir/pda.hpp"
#include "mupir/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mupir {

// Partial geometric sum 1 + 1/B + ... + B^-terms, the building block of all
// download-rate formulas here. The term count is explicit because the two
// natural conventions (N vs N-1 terms) are easy to mix up at call sites.
Rat pir_series_sum(int servers, long terms);

struct UploadCost {
  Int count;           // exact multiplier in front of the log
  double log2_base;    // log2 of the per-unit alphabet size
  double bits = 0.0;   // count * log2_base
};

struct SchemeMetrics {
  std::string scheme;
  Rat rate;            // min{N - M, rate_raw}
  Rat rate_raw;        // download rate of the coded scheme alone
  Rat rate_uncoded;    // N - M, the plain broadcast fallback
  Int subpacketization;
  UploadCost upload;
};

// Closed-form performance of the array-driven scheme on a validated array:
// the delivery needs (B-1)F pieces per file, costs BK(N-1)log2(B) upload
// bits, and downloads S/F plus the expected surviving share of server 0.
SchemeMetrics pda_scheme_metrics(const Pda& pda, int servers, int files);

// Shortcut for g-regular arrays; agrees with pda_scheme_metrics there.
Rat regular_pda_rate(int g, int labels, int subfiles, int servers, int files);

// Per-server split of the expected download, in units of L. Server 0 is the
// only server that ever suppresses, so it is the only one below S/(F(B-1)).
Rat pda_server0_mean_rate(const Pda& pda, int servers, int files);
Rat pda_other_server_rate(const Pda& pda, int servers);

// Same scheme on the MAN array, evaluated from (K, t) alone without
// building the array. Must match pda_scheme_metrics(man_pda(K,t), ...).
SchemeMetrics man_scheme_metrics(int users, int t, int servers, int files);

// Baseline that runs a separate capacity-achieving PIR code on top of MAN
// caching. Better rate, far worse subpacketization and upload.
SchemeMetrics product_design_metrics(int users, int t, int servers, int files);

// Single-server coded caching rate (K-t)/(t+1) at the memory point M=tN/K.
Rat coded_caching_rate(int users, int t);

struct OrderOptimalityReport {
  Rat scheme_rate;              // array-scheme rate on the MAN array, unclamped
  Rat caching_rate;             // (K-t)/(t+1)
  std::optional<Rat> ratio;     // scheme/caching; absent when both are zero
  Rat geometric_bound;          // B/(B-1)
  bool within_geometric_bound;  // scheme <= caching * B/(B-1)
  bool within_factor2;          // scheme <= 2 * optimal-uncoded-placement rate
  bool within_factor8;          // scheme <= 8 * (lower bound caching/4)
};

// Numeric check that the privacy overhead over plain coded caching is a
// bounded geometric factor, never more than 2x.
OrderOptimalityReport order_optimality_check(int users, int files, int servers,
                                             int t);

// log2(x!/y!) for x = B^N, y = B^(N-1): the per-query alphabet size of the
// baseline PIR code. Switches to lgamma once the direct sum gets too long.
double log2_factorial_ratio(int servers, int files);
// log2 of an exact big integer, for cross-checking the above.
double log2_int(const Int& x);

struct SchemeRatios {
  int users;                 // q(m+1)
  int t;                     // m+1
  Rat rate_new;              // array scheme on the q^m-row family
  Rat rate_pd;
  Rat rate_ratio;            // rate_new / rate_pd, direct division
  Rat rate_ratio_closed;     // the factored closed form; equals rate_ratio
  Rat rate_ratio_limit;      // 1/(1 - B^-N), the large-K limit
  Int subpack_new;           // (B-1) q^m
  Int subpack_pd;            // B^N C(K,t)
  Rat subpack_ratio;         // new/pd
  double upload_new_bits;
  double upload_pd_bits;
  double upload_ratio;       // new/pd
  double upload_ratio_bound; // 1/(N(B^N - B^(N-1))), valid for N >= 2
};

// Head-to-head comparison of the low-subpacketization array family (cache
// fraction 1/q, K = q(m+1) users) against the PIR-code baseline.
SchemeRatios scheme_ratios(int q, int m, int servers, int files);

// Two-user, two-file interference-alignment baseline rate; piecewise in the
// cache size M in [0:2]. Comparison plots only.
Rat cia_rate(int servers, const Rat& cache_files);

// Deterministic CSV datasets behind the comparison plots and tables.
std::string emit_figure_data(const std::string& id);
const std::vector<std::string>& figure_data_ids();

}  // namespace mupir
