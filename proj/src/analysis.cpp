#include "mupir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mupir {

Rat pir_series_sum(int servers, long terms) {
  if (servers < 2) throw std::invalid_argument("pir_series_sum: need B >= 2");
  if (terms < 0) throw std::invalid_argument("pir_series_sum: negative terms");
  // 1 + 1/B + ... + B^-terms = (B^(terms+1) - 1) / (B^terms (B - 1))
  const Int b = servers;
  return Rat(int_pow(b, terms + 1) - 1, int_pow(b, terms) * (servers - 1));
}

namespace {

UploadCost query_upload(int servers, int users, int files) {
  UploadCost u;
  u.count = Int(servers) * users * (files - 1);
  u.log2_base = std::log2(static_cast<double>(servers));
  u.bits = u.count.convert_to<double>() * u.log2_base;
  return u;
}

UploadCost zero_upload() { return UploadCost{0, 0.0, 0.0}; }

}  // namespace

SchemeMetrics pda_scheme_metrics(const Pda& pda, int servers, int files) {
  if (servers < 2) throw std::invalid_argument("need B >= 2");
  if (files < 1) throw std::invalid_argument("need N >= 1");
  const int F = pda.subfiles();
  const int S = pda.label_count();

  SchemeMetrics m;
  m.scheme = "pda";
  m.rate_uncoded = Rat(files) - Rat(files) * caching_ratio(pda);
  m.subpacketization = Int(servers - 1) * F;

  if (pda.full_cache()) {
    // Everything is cached; nothing is delivered and nothing needs asking.
    m.rate_raw = 0;
    m.rate = 0;
    m.upload = zero_upload();
    return m;
  }

  OccupancyMap occ = occupancy(pda);
  Rat tail = 0;  // sum over labels of (1/B + ... + B^-(|K_s|(N-1)))
  for (int s = 1; s <= S; ++s)
    tail += pir_series_sum(servers, static_cast<long>(occ.size_of(s)) *
                                        (files - 1)) -
            1;
  m.rate_raw = Rat(S, F) * (1 + tail / S);
  m.rate = std::min(m.rate_raw, m.rate_uncoded);
  m.upload = query_upload(servers, pda.users(), files);
  return m;
}

Rat regular_pda_rate(int g, int labels, int subfiles, int servers, int files) {
  if (g < 1) throw std::invalid_argument("regular_pda_rate: need g >= 1");
  return Rat(labels, subfiles) *
         pir_series_sum(servers, static_cast<long>(g) * (files - 1));
}

Rat pda_server0_mean_rate(const Pda& pda, int servers, int files) {
  const int F = pda.subfiles();
  if (pda.full_cache()) return 0;
  OccupancyMap occ = occupancy(pda);
  Rat sum = 0;
  for (int s = 1; s <= pda.label_count(); ++s) {
    // Label s survives unless every user in K_s drew the all-zero vector.
    long exp = static_cast<long>(occ.size_of(s)) * (files - 1);
    sum += 1 - Rat(1, int_pow(servers, exp));
  }
  return sum / (Int(F) * (servers - 1));
}

Rat pda_other_server_rate(const Pda& pda, int servers) {
  return Rat(pda.label_count(), Int(pda.subfiles()) * (servers - 1));
}

SchemeMetrics man_scheme_metrics(int users, int t, int servers, int files) {
  if (t < 0 || t > users)
    throw std::invalid_argument("man_scheme_metrics: t outside [0:K]");
  SchemeMetrics m;
  m.scheme = "man_pda";
  m.rate_uncoded = Rat(files) * (users - t) / users;  // N - M with M = tN/K
  m.subpacketization = Int(servers - 1) * binomial(users, t);
  if (t == users) {
    m.rate_raw = 0;
    m.rate = 0;
    m.upload = zero_upload();
    return m;
  }
  m.rate_raw =
      Rat(users - t, t + 1) *
      pir_series_sum(servers, static_cast<long>(t + 1) * (files - 1));
  m.rate = std::min(m.rate_raw, m.rate_uncoded);
  m.upload = query_upload(servers, users, files);
  return m;
}

SchemeMetrics product_design_metrics(int users, int t, int servers, int files) {
  if (t < 0 || t > users)
    throw std::invalid_argument("product_design_metrics: t outside [0:K]");
  SchemeMetrics m;
  m.scheme = "product_design";
  m.rate_uncoded = Rat(files) * (users - t) / users;
  m.subpacketization = int_pow(servers, files) * binomial(users, t);
  m.rate_raw = Rat(users - t, t + 1) * pir_series_sum(servers, files - 1);
  m.rate = std::min(m.rate_raw, m.rate_uncoded);
  if (t == users) {
    m.upload = zero_upload();
    return m;
  }
  m.upload.count = Int(t + 1) * binomial(users, t + 1) * servers * files;
  m.upload.log2_base = log2_factorial_ratio(servers, files);
  m.upload.bits = m.upload.count.convert_to<double>() * m.upload.log2_base;
  return m;
}

Rat coded_caching_rate(int users, int t) {
  if (t < 0 || t > users)
    throw std::invalid_argument("coded_caching_rate: t outside [0:K]");
  return Rat(users - t, t + 1);
}

OrderOptimalityReport order_optimality_check(int users, int files, int servers,
                                             int t) {
  OrderOptimalityReport r;
  r.scheme_rate = man_scheme_metrics(users, t, servers, files).rate_raw;
  r.caching_rate = coded_caching_rate(users, t);
  r.geometric_bound = Rat(servers, servers - 1);
  if (r.caching_rate != 0) r.ratio = r.scheme_rate / r.caching_rate;
  r.within_geometric_bound =
      r.scheme_rate <= r.caching_rate * r.geometric_bound;
  // The caching rate equals the optimal uncoded-placement rate, and is at
  // most 4x the unrestricted optimum, so both chains reduce to a 2x check.
  r.within_factor2 = r.scheme_rate <= 2 * r.caching_rate;
  r.within_factor8 = r.scheme_rate <= 8 * (r.caching_rate / 4);
  return r;
}

double log2_int(const Int& x) {
  if (x <= 0) throw std::invalid_argument("log2_int: need x > 0");
  const unsigned shift = boost::multiprecision::msb(x);
  if (shift <= 52) return std::log2(x.convert_to<double>());
  // Keep the top bits, count the rest.
  const Int top = x >> (shift - 52);
  return std::log2(top.convert_to<double>()) + (shift - 52);
}

double log2_factorial_ratio(int servers, int files) {
  if (servers < 2 || files < 1)
    throw std::invalid_argument("log2_factorial_ratio: need B >= 2, N >= 1");
  const Int lo = int_pow(servers, files - 1);  // B^(N-1)
  const Int hi = lo * servers;                 // B^N
  if (hi <= (1 << 20)) {
    double sum = 0.0;
    for (long j = lo.convert_to<long>() + 1; j <= hi.convert_to<long>(); ++j)
      sum += std::log2(static_cast<double>(j));
    return sum;
  }
  const double hd = hi.convert_to<double>();
  const double ld = lo.convert_to<double>();
  if (!std::isfinite(hd))
    throw std::invalid_argument("log2_factorial_ratio: B^N out of range");
  return (std::lgamma(hd + 1) - std::lgamma(ld + 1)) / std::log(2.0);
}

SchemeRatios scheme_ratios(int q, int m, int servers, int files) {
  if (q < 2 || m < 1)
    throw std::invalid_argument("scheme_ratios: need q >= 2, m >= 1");
  if (files < 2)
    throw std::invalid_argument("scheme_ratios: need N >= 2");
  const int B = servers;
  const int N = files;
  SchemeRatios r;
  r.users = q * (m + 1);
  r.t = m + 1;

  // Cache fraction 1/q array: (m+1)-regular with S/F = q - 1.
  const long reg_terms = static_cast<long>(m + 1) * (N - 1);
  r.rate_new = Rat(q - 1) * pir_series_sum(B, reg_terms);
  r.rate_pd = Rat(r.users - r.t, r.t + 1) * pir_series_sum(B, N - 1);
  r.rate_ratio = r.rate_new / r.rate_pd;
  r.rate_ratio_closed = Rat(m + 2, m + 1) *
                        (1 - Rat(1, int_pow(B, reg_terms + 1))) /
                        (1 - Rat(1, int_pow(B, N)));
  r.rate_ratio_limit = Rat(1) / (1 - Rat(1, int_pow(B, N)));

  r.subpack_new = Int(B - 1) * int_pow(q, m);
  r.subpack_pd = int_pow(B, N) * binomial(r.users, r.t);
  r.subpack_ratio = Rat(r.subpack_new, r.subpack_pd);

  const UploadCost un = query_upload(B, r.users, N);
  r.upload_new_bits = un.bits;
  const Int pd_count = Int(r.t + 1) * binomial(r.users, r.t + 1) * B * N;
  r.upload_pd_bits =
      pd_count.convert_to<double>() * log2_factorial_ratio(B, N);
  r.upload_ratio = r.upload_new_bits / r.upload_pd_bits;
  r.upload_ratio_bound =
      1.0 / (static_cast<double>(N) *
             (int_pow(B, N) - int_pow(B, N - 1)).convert_to<double>());
  return r;
}

Rat cia_rate(int servers, const Rat& cache_files) {
  const int B = servers;
  const Rat& M = cache_files;
  if (B < 2) throw std::invalid_argument("cia_rate: need B >= 2");
  if (M < 0 || M > 2)
    throw std::invalid_argument("cia_rate: cache size outside [0:2]");
  if (M <= Rat(B - 1, 2 * B)) return 2 * (1 - M);
  if (M <= Rat(2 * (B - 1), 2 * B - 1))
    return Rat(B + 1, 2 * B + 1) * (3 - 2 * M);
  return (1 - M / 2) * (1 + Rat(1, B));
}

namespace {

std::string csv_rate_small() {
  // B=2, N=4, K=4; one row per integer memory point.
  const int B = 2, N = 4, K = 4;
  std::ostringstream out;
  out << "t,cache_fraction,rate_pda,rate_pda_exact,rate_pd,rate_pd_exact\n";
  for (int t = 0; t <= K; ++t) {
    SchemeMetrics man = man_scheme_metrics(K, t, B, N);
    SchemeMetrics pd = product_design_metrics(K, t, B, N);
    out << t << ',' << rat_str(Rat(t, K)) << ','
        << float_str(to_double(man.rate)) << ',' << rat_str(man.rate) << ','
        << float_str(to_double(pd.rate)) << ',' << rat_str(pd.rate) << '\n';
  }
  return out.str();
}

std::string csv_upload_small() {
  const int B = 2, N = 4, K = 4;
  std::ostringstream out;
  out << "t,cache_fraction,upload_pda_bits,upload_pd_bits,"
         "upload_ratio_pd_over_pda\n";
  for (int t = 0; t < K; ++t) {  // at t=K both costs are zero
    SchemeMetrics man = man_scheme_metrics(K, t, B, N);
    SchemeMetrics pd = product_design_metrics(K, t, B, N);
    out << t << ',' << rat_str(Rat(t, K)) << ',' << float_str(man.upload.bits)
        << ',' << float_str(pd.upload.bits) << ','
        << float_str(pd.upload.bits / man.upload.bits) << '\n';
  }
  return out.str();
}

std::string csv_rate_large() {
  // B=10, N=18, q=m=3: the two low-subpacketization arrays plus the
  // no-cache and full-cache endpoints.
  const int B = 10, N = 18, q = 3, m = 3;
  const int K = q * (m + 1);
  std::ostringstream out;
  out << "cache_fraction,rate_pda,rate_pda_exact,rate_pd,rate_pd_exact\n";

  auto emit = [&](const Rat& mn, const Rat& pda_raw, const Rat& pd_rate) {
    Rat uncoded = Rat(N) * (1 - mn);
    Rat pda_rate = std::min(pda_raw, uncoded);
    out << rat_str(mn) << ',' << float_str(to_double(pda_rate)) << ','
        << rat_str(pda_rate) << ',' << float_str(to_double(pd_rate)) << ','
        << rat_str(pd_rate) << '\n';
  };

  // M/N = 0: every user runs plain PIR (the one-row array with S = K).
  emit(0, man_scheme_metrics(K, 0, B, N).rate_raw,
       product_design_metrics(K, 0, B, N).rate);
  // M/N = 1/q: (m+1)-regular (q(m+1), q^m, q^(m-1), q^(m+1)-q^m).
  {
    int F = 27, S = 54, g = m + 1;
    emit(Rat(1, q), regular_pda_rate(g, S, F, B, N),
         product_design_metrics(K, K / q, B, N).rate);
  }
  // M/N = 1-1/q: (q-1)(m+1)-regular (q(m+1), (q-1)q^m, (q-1)^2 q^(m-1), q^m).
  {
    int F = 54, S = 27, g = (q - 1) * (m + 1);
    emit(Rat(q - 1, q), regular_pda_rate(g, S, F, B, N),
         product_design_metrics(K, K - K / q, B, N).rate);
  }
  // M/N = 1: caches hold the whole library.
  emit(1, 0, 0);
  return out.str();
}

std::string csv_ratio_series(const std::string& which, int B, int N, int q) {
  std::ostringstream out;
  if (which == "rate")
    out << "m,users,rate_pda,rate_pd,rate_ratio_pda_over_pd\n";
  else if (which == "subpack")
    out << "m,users,subpack_pda,subpack_pd,subpack_ratio_pd_over_pda\n";
  else
    out << "m,users,upload_pda_bits,upload_pd_bits,upload_ratio_pd_over_pda\n";
  for (int m = 1; m <= 8; ++m) {
    SchemeRatios r = scheme_ratios(q, m, B, N);
    out << m << ',' << r.users << ',';
    if (which == "rate") {
      out << float_str(to_double(r.rate_new)) << ','
          << float_str(to_double(r.rate_pd)) << ','
          << float_str(to_double(r.rate_ratio)) << '\n';
    } else if (which == "subpack") {
      out << r.subpack_new << ',' << r.subpack_pd << ','
          << float_str(to_double(Rat(1) / r.subpack_ratio)) << '\n';
    } else {
      out << float_str(r.upload_new_bits) << ','
          << float_str(r.upload_pd_bits) << ','
          << float_str(r.upload_pd_bits / r.upload_new_bits) << '\n';
    }
  }
  return out.str();
}

void emit_compare_rows(std::ostringstream& out,
                       const std::vector<SchemeMetrics>& columns) {
  out << "rate";
  for (const auto& c : columns) out << ',' << float_str(to_double(c.rate));
  out << "\nsubpacketization";
  for (const auto& c : columns) out << ',' << c.subpacketization;
  out << "\nupload_bits";
  for (const auto& c : columns) out << ',' << float_str(c.upload.bits);
  out << '\n';
}

std::string csv_compare_small() {
  const int B = 2, N = 4, K = 4, t = 2;
  std::ostringstream out;
  out << "parameter,man_pda,product_design\n";
  emit_compare_rows(
      out, {man_scheme_metrics(K, t, B, N), product_design_metrics(K, t, B, N)});
  return out.str();
}

std::string csv_compare_large() {
  const int B = 10, N = 18, q = 3, m = 3;
  const int K = q * (m + 1);
  SchemeRatios low = scheme_ratios(q, m, B, N);

  // Cache fraction 1-1/q member of the same family.
  SchemeMetrics high;
  high.scheme = "pda";
  {
    int F = 54, S = 27, g = (q - 1) * (m + 1);
    high.rate_raw = regular_pda_rate(g, S, F, B, N);
    high.rate_uncoded = Rat(N, q);
    high.rate = std::min(high.rate_raw, high.rate_uncoded);
    high.subpacketization = Int(B - 1) * F;
    high.upload = query_upload(B, K, N);
  }
  SchemeMetrics low_m;
  low_m.scheme = "pda";
  low_m.rate = low.rate_new;
  low_m.subpacketization = low.subpack_new;
  low_m.upload = query_upload(B, K, N);

  std::ostringstream out;
  out << "parameter,pda_low_memory,pda_high_memory,product_design_low,"
         "product_design_high\n";
  emit_compare_rows(out, {low_m, high, product_design_metrics(K, K / q, B, N),
                          product_design_metrics(K, K - K / q, B, N)});
  return out.str();
}

}  // namespace

const std::vector<std::string>& figure_data_ids() {
  static const std::vector<std::string> ids = {
      "rate-small",    "upload-small", "rate-large",    "rate-ratio",
      "subpack-ratio", "upload-ratio", "compare-small", "compare-large"};
  return ids;
}

std::string emit_figure_data(const std::string& id) {
  if (id == "rate-small") return csv_rate_small();
  if (id == "upload-small") return csv_upload_small();
  if (id == "rate-large") return csv_rate_large();
  if (id == "rate-ratio") return csv_ratio_series("rate", 10, 300, 3);
  if (id == "subpack-ratio") return csv_ratio_series("subpack", 10, 18, 3);
  if (id == "upload-ratio") return csv_ratio_series("upload", 2, 18, 3);
  if (id == "compare-small") return csv_compare_small();
  if (id == "compare-large") return csv_compare_large();
  throw std::invalid_argument("unknown dataset id '" + id + "'");
}

}  // namespace mupir
