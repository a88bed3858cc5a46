#pragma once

#include "mupir/pda.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace mupir {

using Bytes = std::vector<std::uint8_t>;

// Raised when a peer breaks a protocol invariant (malformed query, missing
// broadcast entry). Distinct from std::invalid_argument so servers can
// refuse bad clients without masking caller bugs.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  int servers;          // B >= 2
  int files;            // N >= 1
  std::uint64_t seed;
  Pda pda;

  int users() const { return pda.users(); }
  void check() const;
};

// N equal-length padded files, viewed as F subfiles x (B-1) packets each.
// Packet index 0 is the implicit all-zero packet; real packets are 1..B-1.
class FileSet {
 public:
  // Pads every file with zero bytes up to the least multiple of F*(B-1).
  // All inputs must have equal length.
  static FileSet from_bytes(std::vector<Bytes> files, int subfiles,
                            int servers);
  static FileSet seeded_random(int count, std::size_t bytes, int subfiles,
                               int servers, std::uint64_t seed);

  int count() const { return static_cast<int>(files_.size()); }
  int subfiles() const { return subfiles_; }
  int servers() const { return servers_; }
  std::size_t original_bytes() const { return original_bytes_; }
  std::size_t padded_bytes() const { return padded_bytes_; }
  std::size_t packet_bytes() const { return packet_bytes_; }

  const Bytes& file(int n) const { return files_.at(n); }
  std::span<const std::uint8_t> subfile(int n, int f) const;
  // j in [1:B-1]; use xor_packet for the j = 0 zero-packet convention.
  std::span<const std::uint8_t> packet(int n, int f, int j) const;
  // dst ^= packet j of subfile f of file n; j = 0 is a no-op.
  void xor_packet(Bytes& dst, int n, int f, int j) const;

 private:
  std::vector<Bytes> files_;
  int subfiles_ = 1;
  int servers_ = 2;
  std::size_t original_bytes_ = 0;
  std::size_t padded_bytes_ = 0;
  std::size_t packet_bytes_ = 0;
};

struct CacheContent {
  int user = 0;
  // (file n, subfile f) -> bytes, for every starred row of the user's column.
  std::map<std::pair<int, int>, Bytes> subfiles;

  bool has(int n, int f) const { return subfiles.count({n, f}) != 0; }
  const Bytes& get(int n, int f) const;
  std::size_t total_bytes() const;
};

std::vector<CacheContent> place(const SystemConfig& config,
                                const FileSet& files);

struct Query {
  int user = 0;
  int server = 0;
  std::vector<int> symbols;  // length N, each in [0:B-1], sum == server mod B
};

struct QuerySet {
  std::vector<std::vector<int>> v;           // per user, length N-1
  std::vector<std::vector<Query>> queries;   // [user][server]

  const Query& of(int user, int server) const { return queries[user][server]; }
  // (sum of V^k) mod B; the server index whose answer carries no fresh
  // packet for user k.
  int v_bar(int user, int servers) const;
};

// Deterministic core: expand explicit per-user vectors V into the B queries
// of every user. demands[k] selects where the varying coordinate goes.
QuerySet build_queries(const SystemConfig& config,
                       const std::vector<int>& demands,
                       std::vector<std::vector<int>> v);

// Draws every V^k uniformly from [0:B-1]^(N-1) using the config seed and the
// round index, then delegates to build_queries.
QuerySet gen_queries(const SystemConfig& config, const std::vector<int>& demands,
                     std::uint64_t round = 0);

// Deliberately broken variant for auditing the auditor: skips the
// randomization (V = 0), so the varying coordinate sits exposed at the
// demanded index. Must be flagged by the privacy audit.
QuerySet gen_queries_leaky(const SystemConfig& config,
                           const std::vector<int>& demands);

struct Broadcast {
  int server = 0;
  std::vector<char> present;     // size S; entry s-1 nonzero if X_{b,s} sent
  std::vector<Bytes> packets;    // size S; empty when absent

  std::size_t payload_bits() const;
  // Presence framing overhead, only ever nonzero for server 0.
  std::size_t bitmap_bits() const;
};

// Which labels server b transmits for this query batch. Servers b != 0 send
// everything; server 0 drops label s when every user in K_s sent the all-zero
// query (the coded packet is identically zero then, whatever the files hold).
std::vector<char> answer_presence(const SystemConfig& config, int server,
                                  const std::vector<Query>& queries);
// Same, reading the per-server slice of a full query set (no copies).
std::vector<char> answer_presence(const SystemConfig& config, int server,
                                  const QuerySet& queries);

// queries holds one entry per user, already restricted to this server.
Broadcast server_answer(const SystemConfig& config, const FileSet& files,
                        int server, const std::vector<Query>& queries);

// Recovers user k's demanded file from its cache plus all broadcasts. The
// interference terms are rebuilt from the other users' queries, so the full
// QuerySet is needed, matching the cooperative decoder of the scheme.
Bytes decode_file(const SystemConfig& config, int user, int demand,
                  const CacheContent& cache, const QuerySet& queries,
                  const std::vector<Broadcast>& broadcasts,
                  const FileSet& layout);

// Fallback mode with no privacy machinery: every user caches the same Z/F
// prefix of every file and the servers broadcast the remaining suffixes,
// spread round-robin at packet granularity.
std::vector<CacheContent> place_uncoded(const SystemConfig& config,
                                        const FileSet& files);
std::vector<Broadcast> uncoded_delivery(const SystemConfig& config,
                                        const FileSet& files);
Bytes decode_uncoded(const SystemConfig& config, int demand,
                     const CacheContent& cache,
                     const std::vector<Broadcast>& broadcasts,
                     const FileSet& layout);

enum class RoundMode { pda, uncoded };

struct RoundTranscript {
  RoundMode mode = RoundMode::pda;
  std::uint64_t seed = 0;
  std::uint64_t round = 0;
  std::vector<int> demands;
  std::vector<std::vector<int>> v;              // empty in uncoded mode
  QuerySet queries;                             // empty in uncoded mode
  std::vector<Broadcast> broadcasts;
  std::vector<std::size_t> download_bits;       // per server, payload only
  std::size_t bitmap_bits = 0;
  std::size_t upload_symbols = 0;               // B*K*(N-1) in pda mode
  int upload_symbol_base = 2;
  double upload_analytic_bits = 0.0;            // symbols * log2(base)
  std::size_t upload_wire_bits = 0;             // symbols * ceil(log2 base)
  std::size_t original_bytes = 0;
  std::size_t padded_bytes = 0;
  std::vector<char> success;                    // per user
  std::vector<Bytes> decoded;                   // per user

  bool all_ok() const;
  std::size_t total_download_bits() const;
};

RoundTranscript run_round(const SystemConfig& config, const FileSet& files,
                          const std::vector<int>& demands,
                          std::uint64_t round = 0);
RoundTranscript run_round_with_v(const SystemConfig& config,
                                 const FileSet& files,
                                 const std::vector<int>& demands,
                                 std::vector<std::vector<int>> v);
RoundTranscript run_round_uncoded(const SystemConfig& config,
                                  const FileSet& files,
                                  const std::vector<int>& demands);

// Seeded uniform demand vector, one entry per user.
std::vector<int> gen_demands(const SystemConfig& config, std::uint64_t round = 0);

// Wire form of one query: the first N-1 coordinates (the last is implied by
// the sum constraint), packed little-endian at ceil(log2 B) bits each.
Bytes encode_query_wire(const Query& query, int servers);
Query decode_query_wire(const Bytes& wire, int user, int server, int servers,
                        int files);

}  // namespace mupir
