// Command-line front end: validate / construct / simulate / analyze /
// audit / regress. Machine-readable output goes to files, human summaries
// to stdout, errors to stderr. Exit codes: 0 ok, 1 domain failure
// (invalid array, failed audit, failed decode, failed regression),
// 2 usage or I/O error.
#include "mupir/constructions.hpp"
#include "mupir/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mupir;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MUPIR_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    throw std::invalid_argument("MUPIR_SEED is not an unsigned integer");
  }
  return 0;
}

// A pda reference is either a path to a .pda file or "catalog:<name>".
Pda resolve_pda(const std::string& ref) {
  const std::string prefix = "catalog:";
  if (ref.rfind(prefix, 0) == 0) {
    const std::string name = ref.substr(prefix.size());
    const auto& cat = example_pdas();
    auto it = cat.find(name);
    if (it == cat.end()) {
      std::string known;
      for (const auto& [k, v] : cat) known += (known.empty() ? "" : ", ") + k;
      throw std::invalid_argument("unknown catalog entry '" + name +
                                  "' (have: " + known + ")");
    }
    return it->second;
  }
  return load_pda(ref);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PdaStructureError("cannot write " + path.string());
  out << text;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    out.push_back(std::stoi(tok, &pos));
    if (pos != tok.size()) throw std::invalid_argument("bad integer: " + tok);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

// Regularity needs the occupancy map, which only exists for valid arrays.
std::string describe(const Pda& pda, bool valid = true) {
  std::ostringstream os;
  os << "(" << pda.users() << "," << pda.subfiles() << ","
     << pda.stars_per_column() << "," << pda.label_count() << ")";
  if (valid) {
    if (auto g = regularity(pda))
      os << " " << *g << "-regular";
    else if (!pda.full_cache())
      os << " irregular";
  }
  os << ", cache fraction " << rat_str(caching_ratio(pda));
  return os.str();
}

int cmd_validate(const std::string& path, bool quiet) {
  Pda pda = load_pda(path);
  ValidationReport report = validate(pda);
  if (!quiet) {
    std::cout << path << ": " << describe(pda, report.valid()) << "\n";
    for (const auto& v : report.violations) {
      std::cout << "  " << violation_kind_name(v.kind) << " at";
      for (auto [r, c] : v.cells) std::cout << " (" << r << "," << c << ")";
      std::cout << ": " << v.message << "\n";
    }
    std::cout << (report.valid()
                      ? "valid"
                      : "invalid, " + std::to_string(report.violations.size()) +
                            " violation(s)")
              << "\n";
  }
  return report.valid() ? kExitOk : kExitDomain;
}

int cmd_construct(const std::string& family, int k, int t, int f, int z,
                  const std::string& out, bool quiet) {
  Pda pda;
  if (family == "man") {
    if (k < 0 || t < 0)
      throw std::invalid_argument("man needs --k and --t");
    pda = man_pda(k, t);
  } else if (family == "single-user") {
    if (f < 0 || z < 0)
      throw std::invalid_argument("single-user needs --f and --z");
    pda = single_user_pda(f, z);
  } else if (family == "trivial") {
    pda = Pda();
  } else if (family.rfind("catalog:", 0) == 0) {
    pda = resolve_pda(family);
  } else {
    throw std::invalid_argument(
        "unknown family '" + family +
        "' (man, single-user, trivial, catalog:<name>)");
  }
  if (!out.empty()) save_pda(pda, out);
  if (!quiet) {
    std::cout << describe(pda) << "\n";
    if (out.empty())
      std::cout << serialize_pda(pda);
    else
      std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

json queries_to_json(const QuerySet& qs) {
  json arr = json::array();
  for (const auto& per_user : qs.queries) {
    json row = json::array();
    for (const Query& q : per_user) row.push_back(q.symbols);
    arr.push_back(row);
  }
  return arr;
}

json transcript_to_json(const RoundTranscript& t, bool dump_broadcasts) {
  json j;
  j["mode"] = t.mode == RoundMode::pda ? "pda" : "uncoded";
  j["seed"] = t.seed;
  j["round"] = t.round;
  j["demands"] = t.demands;
  if (!t.v.empty()) j["v"] = t.v;
  if (!t.queries.queries.empty()) j["queries"] = queries_to_json(t.queries);
  json present = json::array();
  for (const Broadcast& b : t.broadcasts) {
    json p = json::array();
    for (size_t s = 0; s < b.present.size(); ++s)
      if (b.present[s]) p.push_back(s + 1);
    present.push_back(p);
  }
  j["present"] = present;
  j["download_bits"] = t.download_bits;
  j["bitmap_bits"] = t.bitmap_bits;
  j["upload"] = {{"symbols", t.upload_symbols},
                 {"base", t.upload_symbol_base},
                 {"analytic_bits", t.upload_analytic_bits},
                 {"wire_bits", t.upload_wire_bits}};
  j["original_bytes"] = t.original_bytes;
  j["padded_bytes"] = t.padded_bytes;
  json ok = json::array();
  for (char c : t.success) ok.push_back(c != 0);
  j["success"] = ok;
  if (dump_broadcasts) {
    json serv = json::array();
    for (const Broadcast& b : t.broadcasts) {
      json packets = json::array();
      for (const Bytes& p : b.packets) {
        std::ostringstream hex;
        hex << std::hex;
        for (unsigned byte : p) hex << (byte >> 4) << (byte & 15);
        packets.push_back(hex.str());
      }
      serv.push_back(packets);
    }
    j["broadcast_hex"] = serv;
  }
  return j;
}

std::vector<std::vector<int>> parse_vectors(const json& arr, int users,
                                            int width, const char* what) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != users)
    throw std::invalid_argument(std::string(what) + " must list one row per user");
  std::vector<std::vector<int>> out;
  for (const auto& row : arr) {
    std::vector<int> r = row.get<std::vector<int>>();
    if (static_cast<int>(r.size()) != width)
      throw std::invalid_argument(std::string(what) + " rows must have length " +
                                  std::to_string(width));
    out.push_back(std::move(r));
  }
  return out;
}

FileSet load_file_dir(const fs::path& dir, int n, int subfiles, int servers) {
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  if (static_cast<int>(paths.size()) != n)
    throw std::invalid_argument("files_dir holds " +
                                std::to_string(paths.size()) +
                                " files, config needs " + std::to_string(n));
  std::vector<Bytes> blobs;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw PdaStructureError("cannot read " + p.string());
    Bytes b((std::istreambuf_iterator<char>(in)),
            std::istreambuf_iterator<char>());
    blobs.push_back(std::move(b));
  }
  return FileSet::from_bytes(std::move(blobs), subfiles, servers);
}

void print_metrics(const SystemConfig& config) {
  SchemeMetrics m =
      pda_scheme_metrics(config.pda, config.servers, config.files);
  std::cout << "closed form: rate " << rat_str(m.rate) << " = "
            << float_str(to_double(m.rate)) << " L, subpacketization "
            << m.subpacketization.str() << ", upload "
            << m.upload.count.str() << " * log2(" << config.servers
            << ") = " << float_str(m.upload.bits) << " bits\n";
}

int cmd_simulate(const std::string& plan_path, const std::string& out_path,
                 bool dump_broadcasts, bool quiet) {
  std::ifstream in(plan_path);
  if (!in) throw PdaStructureError("cannot open " + plan_path);
  json plan = json::parse(in);

  SystemConfig config;
  config.servers = plan.at("B").get<int>();
  config.files = plan.at("N").get<int>();
  config.seed = plan.contains("seed") ? plan["seed"].get<std::uint64_t>()
                                      : default_seed();
  config.pda = resolve_pda(plan.at("pda_path").get<std::string>());
  config.check();
  const int users = config.users();

  std::optional<std::vector<int>> demands;
  if (plan.contains("demands"))
    demands = plan["demands"].get<std::vector<int>>();

  if (plan.contains("estimate")) {
    const json& est_cfg = plan["estimate"];
    ExperimentPlan ep;
    ep.config = config;
    const std::string mode = est_cfg.value("mode", "exhaustive");
    if (mode == "exhaustive")
      ep.mode = ExperimentPlan::Mode::exhaustive;
    else if (mode == "monte_carlo")
      ep.mode = ExperimentPlan::Mode::monte_carlo;
    else
      throw std::invalid_argument("estimate.mode must be exhaustive or monte_carlo");
    if (est_cfg.contains("trials"))
      ep.trials = est_cfg["trials"].get<std::size_t>();
    ep.demands = demands;
    RateEstimate est = estimate_rate(ep);

    json rep;
    rep["mode"] = mode;
    rep["realizations"] = est.realizations;
    rep["mean_total"] = est.mean_total;
    rep["mean_per_server"] = est.mean_per_server;
    rep["analytic_total"] = rat_str(est.analytic_total);
    rep["analytic_server0"] = rat_str(est.analytic_server0);
    if (est.exhaustive) {
      rep["exact_total"] = rat_str(est.exact_total);
      rep["exact_server0"] = rat_str(est.exact_server0);
      rep["matches_analytic"] = est.matches_analytic;
    } else {
      rep["half_width_95"] = est.half_width_95;
    }
    if (!out_path.empty()) write_text(out_path, rep.dump(2) + "\n");
    if (!quiet) {
      if (est.exhaustive)
        std::cout << "exhaustive over " << est.realizations
                  << " realizations: mean rate " << rat_str(est.exact_total)
                  << " L (server 0: " << rat_str(est.exact_server0) << " L), "
                  << (est.matches_analytic ? "matches" : "DISAGREES with")
                  << " closed form " << rat_str(est.analytic_total) << "\n";
      else
        std::cout << "monte carlo over " << est.realizations
                  << " trials: mean rate " << float_str(est.mean_total)
                  << " +- " << float_str(est.half_width_95)
                  << " L, closed form "
                  << float_str(to_double(est.analytic_total)) << "\n";
    }
    return est.exhaustive && !est.matches_analytic ? kExitDomain : kExitOk;
  }

  const std::size_t l_bytes = plan.at("L_bytes").get<std::size_t>();
  if (l_bytes == 0) throw std::invalid_argument("L_bytes must be positive");
  const std::string mode = plan.value("mode", "pda");
  if (mode != "pda" && mode != "uncoded")
    throw std::invalid_argument("mode must be pda or uncoded");
  const std::uint64_t rounds = plan.value("rounds", std::uint64_t{1});
  if (rounds == 0) throw std::invalid_argument("rounds must be positive");

  FileSet files =
      plan.contains("files_dir")
          ? load_file_dir(plan["files_dir"].get<std::string>(), config.files,
                          config.pda.subfiles(), config.servers)
          : FileSet::seeded_random(config.files, l_bytes,
                                   config.pda.subfiles(), config.servers,
                                   config.seed);

  json transcripts = json::array();
  bool all_ok = true;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    std::vector<int> d = demands ? *demands : gen_demands(config, r);
    RoundTranscript t;
    if (mode == "uncoded") {
      t = run_round_uncoded(config, files, d);
    } else if (plan.contains("v")) {
      t = run_round_with_v(
          config, files, d,
          parse_vectors(plan["v"], users, config.files - 1, "v"));
    } else {
      t = run_round(config, files, d, r);
    }
    t.round = r;
    all_ok = all_ok && t.all_ok();
    transcripts.push_back(transcript_to_json(t, dump_broadcasts));
    if (!quiet) {
      const double l_bits = static_cast<double>(t.padded_bytes) * 8.0;
      std::cout << "round " << r << ": download "
                << t.total_download_bits() << " bits = "
                << float_str(static_cast<double>(t.total_download_bits()) /
                             l_bits)
                << " L, upload " << t.upload_symbols << " base-"
                << t.upload_symbol_base << " symbols = "
                << float_str(t.upload_analytic_bits) << " bits, "
                << (t.all_ok() ? "all users decoded"
                              : "DECODE FAILURE")
                << "\n";
    }
  }
  if (!quiet && mode == "pda") print_metrics(config);
  if (!out_path.empty()) {
    json doc = transcripts.size() == 1 ? transcripts[0] : transcripts;
    write_text(out_path, doc.dump(2) + "\n");
    if (!quiet) std::cout << "wrote " << out_path << "\n";
  }
  return all_ok ? kExitOk : kExitDomain;
}

int cmd_analyze(const std::string& id, std::string out_path, bool list,
                bool quiet) {
  if (list) {
    for (const auto& known : figure_data_ids()) std::cout << known << "\n";
    return kExitOk;
  }
  std::string csv = emit_figure_data(id);
  if (out_path.empty()) out_path = id + ".csv";
  write_text(out_path, csv);
  if (!quiet) {
    const auto rows = std::count(csv.begin(), csv.end(), '\n');
    std::cout << "wrote " << out_path << " (" << rows << " lines)\n";
  }
  return kExitOk;
}

int cmd_audit(const std::string& pda_ref, int servers, int files,
              const std::string& mode,
              const std::vector<std::string>& demand_args,
              std::size_t samples, std::uint64_t seed, bool leaky,
              std::size_t cap, bool quiet) {
  SystemConfig config;
  config.servers = servers;
  config.files = files;
  config.seed = seed;
  config.pda = resolve_pda(pda_ref);
  config.check();

  std::vector<std::vector<int>> demands;
  for (const std::string& d : demand_args) demands.push_back(parse_int_list(d));

  PrivacyReport rep;
  if (mode == "exact") {
    if (leaky)
      throw std::invalid_argument("--leaky only applies to the empirical audit");
    rep = privacy_audit_exact(config, demands, cap);
    if (!quiet)
      std::cout << "exact audit over all randomness: max TV "
                << rat_str(rep.max_tv_exact) << ", joint distribution "
                << (rep.uniform_ok ? "uniform" : "NOT uniform") << "\n";
  } else if (mode == "empirical") {
    rep = privacy_audit_empirical(config, demands, samples, leaky);
    if (!quiet)
      std::cout << "empirical audit, " << rep.samples
                << " samples per demand vector"
                << (rep.marginals_only ? " (per-user marginals)" : " (joint)")
                << ": max TV " << float_str(rep.max_tv)
                << ", min chi-square p " << float_str(rep.min_p_value) << "\n";
  } else {
    throw std::invalid_argument("mode must be exact or empirical");
  }
  if (!quiet)
    std::cout << (rep.flagged ? "FLAGGED: " + rep.detail : "no leak found")
              << "\n";
  return rep.flagged ? kExitDomain : kExitOk;
}

int cmd_regress(bool quiet) {
  std::vector<RegressionResult> results = regression_suite();
  int failed = 0;
  for (const RegressionResult& r : results) {
    if (!r.pass) ++failed;
    if (!quiet || !r.pass)
      std::cout << (r.pass ? "[ ok ] " : "[fail] ") << r.name
                << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
  }
  if (!quiet)
    std::cout << results.size() - failed << "/" << results.size()
              << " regression checks passed\n";
  return failed == 0 ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Cache-aided private information retrieval driven by placement "
      "delivery arrays: validate and construct arrays, simulate delivery "
      "rounds, evaluate closed-form costs, audit privacy.\n"
      "MUPIR_SEED overrides the default seed (0) where none is given."};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress human-readable summaries");

  auto* validate_cmd =
      app.add_subcommand("validate", "check a .pda file against C1/C2/C3");
  std::string validate_path;
  validate_cmd->add_option("path", validate_path, ".pda file")->required();

  auto* construct_cmd =
      app.add_subcommand("construct", "build an array and emit .pda text");
  std::string family, construct_out;
  int opt_k = -1, opt_t = -1, opt_f = -1, opt_z = -1;
  construct_cmd
      ->add_option("family", family,
                   "man | single-user | trivial | catalog:<name>")
      ->required();
  construct_cmd->add_option("-k,--k", opt_k, "users (man)");
  construct_cmd->add_option("-t,--t", opt_t, "cached fraction parameter (man)");
  construct_cmd->add_option("-f,--f", opt_f, "subfiles (single-user)");
  construct_cmd->add_option("-z,--z", opt_z, "cached subfiles (single-user)");
  construct_cmd->add_option("-o,--out", construct_out, "output .pda path");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "run delivery rounds from a JSON plan");
  std::string plan_path, transcript_out;
  bool dump_broadcasts = false;
  simulate_cmd->add_option("plan", plan_path, "plan JSON file")->required();
  simulate_cmd->add_option("-o,--out", transcript_out,
                           "transcript/report JSON path");
  simulate_cmd->add_flag("--dump-broadcasts", dump_broadcasts,
                         "include hex packet dumps in the transcript");

  auto* analyze_cmd =
      app.add_subcommand("analyze", "emit a deterministic CSV dataset");
  std::string dataset_id = "", analyze_out;
  bool list_ids = false;
  analyze_cmd->add_option("id", dataset_id, "dataset id (see --list)");
  analyze_cmd->add_option("-o,--out", analyze_out, "output CSV path");
  analyze_cmd->add_flag("--list", list_ids, "list known dataset ids");

  auto* audit_cmd =
      app.add_subcommand("audit", "check queries for demand leakage");
  std::string audit_pda, audit_mode = "exact";
  int audit_b = 0, audit_n = 0;
  std::vector<std::string> audit_demands;
  std::size_t audit_samples = 100000, audit_cap = std::size_t{1} << 20;
  std::uint64_t audit_seed = 0;
  bool audit_seed_set = false, audit_leaky = false;
  audit_cmd->add_option("--pda", audit_pda, ".pda path or catalog:<name>")
      ->required();
  audit_cmd->add_option("--b", audit_b, "servers")->required();
  audit_cmd->add_option("--n", audit_n, "files")->required();
  audit_cmd->add_option("--mode", audit_mode, "exact | empirical");
  audit_cmd
      ->add_option("--demands", audit_demands,
                   "comma-separated demand vector, repeatable")
      ->required();
  audit_cmd->add_option("--samples", audit_samples,
                        "empirical samples per demand vector");
  audit_cmd->add_option("--seed", audit_seed, "randomness seed")
      ->each([&](const std::string&) { audit_seed_set = true; });
  audit_cmd->add_flag("--leaky", audit_leaky,
                      "swap in the broken query builder (audit the auditor)");
  audit_cmd->add_option("--cap", audit_cap, "exact enumeration cap");

  auto* regress_cmd =
      app.add_subcommand("regress", "run the fixed regression checks");
  (void)regress_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_path, quiet);
    if (*construct_cmd)
      return cmd_construct(family, opt_k, opt_t, opt_f, opt_z, construct_out,
                           quiet);
    if (*simulate_cmd)
      return cmd_simulate(plan_path, transcript_out, dump_broadcasts, quiet);
    if (*analyze_cmd) {
      if (!list_ids && dataset_id.empty())
        throw std::invalid_argument("analyze needs a dataset id or --list");
      return cmd_analyze(dataset_id, analyze_out, list_ids, quiet);
    }
    if (*audit_cmd)
      return cmd_audit(audit_pda, audit_b, audit_n, audit_mode, audit_demands,
                       audit_samples,
                       audit_seed_set ? audit_seed : default_seed(),
                       audit_leaky, audit_cap, quiet);
    if (*regress_cmd) return cmd_regress(quiet);
  } catch (const PdaStructureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
