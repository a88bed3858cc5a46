#include "mupir/protocol.hpp"

#include "mupir/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mupir {

namespace {

// Smallest width that fits a symbol in [0:B-1].
int symbol_bits(int servers) {
  int bits = 0;
  while ((1 << bits) < servers) ++bits;
  return bits;
}

void xor_bytes(Bytes& dst, const std::uint8_t* src, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) dst[i] ^= src[i];
}

}  // namespace

void SystemConfig::check() const {
  if (servers < 2) throw std::invalid_argument("config: need B >= 2");
  if (files < 1) throw std::invalid_argument("config: need N >= 1");
  auto report = validate(pda);
  if (!report.valid())
    throw std::invalid_argument("config: array fails validation: " +
                                report.summary());
}

FileSet FileSet::from_bytes(std::vector<Bytes> files, int subfiles,
                            int servers) {
  if (files.empty()) throw std::invalid_argument("FileSet: need N >= 1 files");
  if (subfiles < 1 || servers < 2)
    throw std::invalid_argument("FileSet: need F >= 1 and B >= 2");
  FileSet fs;
  fs.subfiles_ = subfiles;
  fs.servers_ = servers;
  fs.original_bytes_ = files[0].size();
  for (const auto& f : files)
    if (f.size() != fs.original_bytes_)
      throw std::invalid_argument("FileSet: files must have equal length");
  const std::size_t unit =
      static_cast<std::size_t>(subfiles) * (servers - 1);
  fs.padded_bytes_ = (fs.original_bytes_ + unit - 1) / unit * unit;
  fs.packet_bytes_ = fs.padded_bytes_ / unit;
  for (auto& f : files) f.resize(fs.padded_bytes_, 0);
  fs.files_ = std::move(files);
  return fs;
}

FileSet FileSet::seeded_random(int count, std::size_t bytes, int subfiles,
                               int servers, std::uint64_t seed) {
  std::vector<Bytes> files(count);
  for (int n = 0; n < count; ++n) {
    StreamRng rng(seed, stream::id(stream::kFileBytes, n));
    files[n].resize(bytes);
    std::size_t i = 0;
    while (i < bytes) {
      std::uint64_t word = rng.next_u64();
      for (int b = 0; b < 8 && i < bytes; ++b, ++i)
        files[n][i] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
  return from_bytes(std::move(files), subfiles, servers);
}

std::span<const std::uint8_t> FileSet::subfile(int n, int f) const {
  const std::size_t sub_bytes = packet_bytes_ * (servers_ - 1);
  return {files_.at(n).data() + f * sub_bytes, sub_bytes};
}

std::span<const std::uint8_t> FileSet::packet(int n, int f, int j) const {
  if (j < 1 || j >= servers_)
    throw std::out_of_range("packet: index outside [1:B-1]");
  const std::size_t sub_bytes = packet_bytes_ * (servers_ - 1);
  return {files_.at(n).data() + f * sub_bytes + (j - 1) * packet_bytes_,
          packet_bytes_};
}

void FileSet::xor_packet(Bytes& dst, int n, int f, int j) const {
  if (j == 0) return;
  auto src = packet(n, f, j);
  xor_bytes(dst, src.data(), src.size());
}

const Bytes& CacheContent::get(int n, int f) const {
  auto it = subfiles.find({n, f});
  if (it == subfiles.end())
    throw ProtocolError("cache of user " + std::to_string(user) +
                        " lacks subfile (" + std::to_string(n) + "," +
                        std::to_string(f) + ")");
  return it->second;
}

std::size_t CacheContent::total_bytes() const {
  std::size_t total = 0;
  for (const auto& [key, bytes] : subfiles) total += bytes.size();
  return total;
}

std::vector<CacheContent> place(const SystemConfig& config,
                                const FileSet& files) {
  const Pda& pda = config.pda;
  if (files.subfiles() != pda.subfiles() || files.servers() != config.servers)
    throw std::invalid_argument("place: file layout does not match config");
  if (files.count() != config.files)
    throw std::invalid_argument("place: file count does not match config");
  std::vector<CacheContent> caches(pda.users());
  for (int k = 0; k < pda.users(); ++k) {
    caches[k].user = k;
    for (int f = 0; f < pda.subfiles(); ++f) {
      if (!pda.is_star(f, k)) continue;
      for (int n = 0; n < files.count(); ++n) {
        auto span = files.subfile(n, f);
        caches[k].subfiles[{n, f}] = Bytes(span.begin(), span.end());
      }
    }
  }
  return caches;
}

int QuerySet::v_bar(int user, int servers) const {
  int sum = 0;
  for (int s : v[user]) sum += s;
  return sum % servers;
}

QuerySet build_queries(const SystemConfig& config,
                       const std::vector<int>& demands,
                       std::vector<std::vector<int>> v) {
  const int B = config.servers;
  const int N = config.files;
  const int K = config.users();
  if (static_cast<int>(demands.size()) != K)
    throw std::invalid_argument("build_queries: need one demand per user");
  for (int d : demands)
    if (d < 0 || d >= N)
      throw std::invalid_argument("build_queries: demand outside [0:N-1]");
  if (static_cast<int>(v.size()) != K)
    throw std::invalid_argument("build_queries: need one V per user");

  QuerySet qs;
  qs.queries.resize(K);
  for (int k = 0; k < K; ++k) {
    const auto& vk = v[k];
    if (static_cast<int>(vk.size()) != N - 1)
      throw std::invalid_argument("build_queries: V must have length N-1");
    int sum = 0;
    for (int s : vk) {
      if (s < 0 || s >= B)
        throw std::invalid_argument("build_queries: V symbol outside [0:B-1]");
      sum += s;
    }
    qs.queries[k].resize(B);
    for (int b = 0; b < B; ++b) {
      Query& q = qs.queries[k][b];
      q.user = k;
      q.server = b;
      q.symbols.reserve(N);
      q.symbols.assign(vk.begin(), vk.begin() + demands[k]);
      q.symbols.push_back((b - sum % B + B) % B);
      q.symbols.insert(q.symbols.end(), vk.begin() + demands[k], vk.end());
    }
  }
  qs.v = std::move(v);
  return qs;
}

QuerySet gen_queries(const SystemConfig& config, const std::vector<int>& demands,
                     std::uint64_t round) {
  const int N = config.files;
  std::vector<std::vector<int>> v(config.users());
  for (int k = 0; k < config.users(); ++k) {
    StreamRng rng(config.seed, stream::id(stream::kUserVector, k), round);
    v[k].resize(N - 1);
    for (int i = 0; i < N - 1; ++i) v[k][i] = rng.next_below(config.servers);
  }
  return build_queries(config, demands, std::move(v));
}

QuerySet gen_queries_leaky(const SystemConfig& config,
                           const std::vector<int>& demands) {
  std::vector<std::vector<int>> v(config.users(),
                                  std::vector<int>(config.files - 1, 0));
  return build_queries(config, demands, std::move(v));
}

namespace {

void check_query_batch(const SystemConfig& config, int server,
                       const std::vector<Query>& queries) {
  const int B = config.servers;
  const int N = config.files;
  if (static_cast<int>(queries.size()) != config.users())
    throw ProtocolError("server " + std::to_string(server) +
                        ": need one query per user");
  for (const Query& q : queries) {
    if (q.server != server)
      throw ProtocolError("query addressed to server " +
                          std::to_string(q.server) + ", not " +
                          std::to_string(server));
    if (static_cast<int>(q.symbols.size()) != N)
      throw ProtocolError("query length != N");
    int sum = 0;
    for (int s : q.symbols) {
      if (s < 0 || s >= B) throw ProtocolError("query symbol outside [0:B-1]");
      sum += s;
    }
    if (sum % B != server)
      throw ProtocolError("query coordinate sum is " + std::to_string(sum % B) +
                          " mod B, expected " + std::to_string(server));
  }
}

}  // namespace

namespace {

std::vector<char> presence_from_active(const Pda& pda,
                                       const std::vector<char>& user_active) {
  // Label s survives if at least one involved user asked for anything.
  std::vector<char> present(pda.label_count(), 0);
  for (int s = 1; s <= pda.label_count(); ++s)
    for (auto [f, k] : pda.cells_of(s))
      if (user_active[k]) {
        present[s - 1] = 1;
        break;
      }
  return present;
}

bool all_zero(const std::vector<int>& symbols) {
  return std::all_of(symbols.begin(), symbols.end(),
                     [](int s) { return s == 0; });
}

}  // namespace

std::vector<char> answer_presence(const SystemConfig& config, int server,
                                  const std::vector<Query>& queries) {
  const Pda& pda = config.pda;
  if (server != 0) return std::vector<char>(pda.label_count(), 1);
  std::vector<char> user_active(pda.users(), 0);
  for (const Query& q : queries) user_active[q.user] = !all_zero(q.symbols);
  return presence_from_active(pda, user_active);
}

std::vector<char> answer_presence(const SystemConfig& config, int server,
                                  const QuerySet& queries) {
  const Pda& pda = config.pda;
  if (server != 0) return std::vector<char>(pda.label_count(), 1);
  std::vector<char> user_active(pda.users(), 0);
  for (int k = 0; k < pda.users(); ++k)
    user_active[k] = !all_zero(queries.of(k, server).symbols);
  return presence_from_active(pda, user_active);
}

std::size_t Broadcast::payload_bits() const {
  std::size_t bits = 0;
  for (const auto& p : packets) bits += p.size() * 8;
  return bits;
}

std::size_t Broadcast::bitmap_bits() const {
  return server == 0 ? present.size() : 0;
}

Broadcast server_answer(const SystemConfig& config, const FileSet& files,
                        int server, const std::vector<Query>& queries) {
  check_query_batch(config, server, queries);
  const Pda& pda = config.pda;

  Broadcast out;
  out.server = server;
  out.present = answer_presence(config, server, queries);
  out.packets.resize(pda.label_count());
  for (int s = 1; s <= pda.label_count(); ++s) {
    if (!out.present[s - 1]) continue;
    Bytes coded(files.packet_bytes(), 0);
    for (auto [f, k] : pda.cells_of(s)) {
      const Query& q = queries[k];
      for (int n = 0; n < config.files; ++n)
        files.xor_packet(coded, n, f, q.symbols[n]);
    }
    out.packets[s - 1] = std::move(coded);
  }
  return out;
}

namespace {

// A_{b,s} contribution of one array cell, rebuilt from cached subfiles.
// Used by decoders to cancel the terms of other users out of X_{b,s}.
void xor_cell_from_cache(Bytes& dst, const CacheContent& cache,
                         const Query& query, int row,
                         std::size_t packet_bytes) {
  for (int n = 0; n < static_cast<int>(query.symbols.size()); ++n) {
    int j = query.symbols[n];
    if (j == 0) continue;
    const Bytes& sub = cache.get(n, row);
    xor_bytes(dst, sub.data() + (j - 1) * packet_bytes, packet_bytes);
  }
}

}  // namespace

Bytes decode_file(const SystemConfig& config, int user, int demand,
                  const CacheContent& cache, const QuerySet& queries,
                  const std::vector<Broadcast>& broadcasts,
                  const FileSet& layout) {
  const Pda& pda = config.pda;
  const int B = config.servers;
  const std::size_t pb = layout.packet_bytes();
  if (static_cast<int>(broadcasts.size()) != B)
    throw ProtocolError("decode: need one broadcast per server");
  for (int b = 0; b < B; ++b)
    if (broadcasts[b].server != b)
      throw ProtocolError("decode: broadcasts out of order");

  const int vbar = queries.v_bar(user, B);
  Bytes file(layout.padded_bytes(), 0);
  const std::size_t sub_bytes = pb * (B - 1);

  for (int f = 0; f < pda.subfiles(); ++f) {
    std::uint8_t* dst = file.data() + f * sub_bytes;
    if (pda.is_star(f, user)) {
      const Bytes& sub = cache.get(demand, f);
      std::copy(sub.begin(), sub.end(), dst);
      continue;
    }
    const int s = pda.at(f, user);

    // Peel every other cell with this label out of the broadcast, leaving
    // this user's own aligned sum A_b for each server.
    std::vector<Bytes> a_own(B, Bytes(pb, 0));
    for (int b = 0; b < B; ++b) {
      const Broadcast& bc = broadcasts[b];
      if (static_cast<int>(bc.present.size()) != pda.label_count())
        throw ProtocolError("decode: broadcast shape mismatch");
      if (bc.present[s - 1]) {
        const Bytes& x = bc.packets[s - 1];
        if (x.size() != pb) throw ProtocolError("decode: packet size mismatch");
        xor_bytes(a_own[b], x.data(), pb);
      }
      for (auto [row, col] : pda.cells_of(s)) {
        if (row == f && col == user) continue;
        xor_cell_from_cache(a_own[b], cache, queries.of(col, b), row, pb);
      }
    }
    // The answer at b = vbar carries no packet of the demanded subfile, so
    // it doubles as the interference reference.
    for (int j = 1; j < B; ++j) {
      Bytes packet = a_own[(j + vbar) % B];
      xor_bytes(packet, a_own[vbar].data(), pb);
      std::copy(packet.begin(), packet.end(), dst + (j - 1) * pb);
    }
  }
  file.resize(layout.original_bytes());
  return file;
}

std::vector<CacheContent> place_uncoded(const SystemConfig& config,
                                        const FileSet& files) {
  // Same cache budget as the array-driven mode: the first Z of F subfiles
  // of every file, identical across users.
  const Pda& pda = config.pda;
  std::vector<CacheContent> caches(pda.users());
  for (int k = 0; k < pda.users(); ++k) {
    caches[k].user = k;
    for (int f = 0; f < pda.stars_per_column(); ++f)
      for (int n = 0; n < files.count(); ++n) {
        auto span = files.subfile(n, f);
        caches[k].subfiles[{n, f}] = Bytes(span.begin(), span.end());
      }
  }
  return caches;
}

std::vector<Broadcast> uncoded_delivery(const SystemConfig& config,
                                        const FileSet& files) {
  const Pda& pda = config.pda;
  const int B = config.servers;
  std::vector<Broadcast> out(B);
  for (int b = 0; b < B; ++b) {
    out[b].server = b;
    out[b].present = {1};
    out[b].packets.resize(1);
  }
  // Uncached packets go out round-robin; receivers replay the same walk.
  std::size_t unit = 0;
  for (int f = pda.stars_per_column(); f < pda.subfiles(); ++f)
    for (int n = 0; n < files.count(); ++n)
      for (int j = 1; j < B; ++j, ++unit) {
        auto p = files.packet(n, f, j);
        Bytes& blob = out[unit % B].packets[0];
        blob.insert(blob.end(), p.begin(), p.end());
      }
  return out;
}

Bytes decode_uncoded(const SystemConfig& config, int demand,
                     const CacheContent& cache,
                     const std::vector<Broadcast>& broadcasts,
                     const FileSet& layout) {
  const Pda& pda = config.pda;
  const int B = config.servers;
  const std::size_t pb = layout.packet_bytes();
  const std::size_t sub_bytes = pb * (B - 1);
  if (static_cast<int>(broadcasts.size()) != B)
    throw ProtocolError("decode: need one broadcast per server");

  Bytes file(layout.padded_bytes(), 0);
  for (int f = 0; f < pda.stars_per_column(); ++f) {
    const Bytes& sub = cache.get(demand, f);
    std::copy(sub.begin(), sub.end(), file.data() + f * sub_bytes);
  }
  std::vector<std::size_t> offset(B, 0);
  std::size_t unit = 0;
  for (int f = pda.stars_per_column(); f < pda.subfiles(); ++f)
    for (int n = 0; n < layout.count(); ++n)
      for (int j = 1; j < B; ++j, ++unit) {
        const Bytes& blob = broadcasts[unit % B].packets.at(0);
        if (offset[unit % B] + pb > blob.size())
          throw ProtocolError("decode: broadcast blob too short");
        if (n == demand)
          std::copy_n(blob.data() + offset[unit % B], pb,
                      file.data() + f * sub_bytes + (j - 1) * pb);
        offset[unit % B] += pb;
      }
  file.resize(layout.original_bytes());
  return file;
}

bool RoundTranscript::all_ok() const {
  return !success.empty() &&
         std::all_of(success.begin(), success.end(), [](char c) { return c; });
}

std::size_t RoundTranscript::total_download_bits() const {
  return std::accumulate(download_bits.begin(), download_bits.end(),
                         std::size_t{0});
}

namespace {

RoundTranscript finish_pda_round(const SystemConfig& config,
                                 const FileSet& files,
                                 const std::vector<int>& demands,
                                 QuerySet queries) {
  const int B = config.servers;
  const int K = config.users();
  const int N = config.files;

  RoundTranscript t;
  t.mode = RoundMode::pda;
  t.seed = config.seed;
  t.demands = demands;
  t.v = queries.v;

  auto caches = place(config, files);
  for (int b = 0; b < B; ++b) {
    std::vector<Query> batch;
    batch.reserve(K);
    for (int k = 0; k < K; ++k) batch.push_back(queries.of(k, b));
    t.broadcasts.push_back(server_answer(config, files, b, batch));
    t.download_bits.push_back(t.broadcasts.back().payload_bits());
  }
  t.bitmap_bits = t.broadcasts[0].bitmap_bits();

  t.upload_symbols = static_cast<std::size_t>(B) * K * (N - 1);
  t.upload_symbol_base = B;
  t.upload_analytic_bits = static_cast<double>(t.upload_symbols) * std::log2(B);
  t.upload_wire_bits = t.upload_symbols * symbol_bits(B);
  t.original_bytes = files.original_bytes();
  t.padded_bytes = files.padded_bytes();

  for (int k = 0; k < K; ++k) {
    Bytes decoded = decode_file(config, k, demands[k], caches[k], queries,
                                t.broadcasts, files);
    bool ok = std::equal(decoded.begin(), decoded.end(),
                         files.file(demands[k]).begin(),
                         files.file(demands[k]).begin() + decoded.size()) &&
              decoded.size() == files.original_bytes();
    t.success.push_back(ok);
    t.decoded.push_back(std::move(decoded));
  }
  t.queries = std::move(queries);
  return t;
}

}  // namespace

RoundTranscript run_round(const SystemConfig& config, const FileSet& files,
                          const std::vector<int>& demands,
                          std::uint64_t round) {
  config.check();
  RoundTranscript t =
      finish_pda_round(config, files, demands, gen_queries(config, demands, round));
  t.round = round;
  return t;
}

RoundTranscript run_round_with_v(const SystemConfig& config,
                                 const FileSet& files,
                                 const std::vector<int>& demands,
                                 std::vector<std::vector<int>> v) {
  config.check();
  return finish_pda_round(config, files, demands,
                          build_queries(config, demands, std::move(v)));
}

RoundTranscript run_round_uncoded(const SystemConfig& config,
                                  const FileSet& files,
                                  const std::vector<int>& demands) {
  config.check();
  const int K = config.users();
  if (static_cast<int>(demands.size()) != K)
    throw std::invalid_argument("run_round: need one demand per user");
  for (int d : demands)
    if (d < 0 || d >= config.files)
      throw std::invalid_argument("run_round: demand outside [0:N-1]");

  RoundTranscript t;
  t.mode = RoundMode::uncoded;
  t.seed = config.seed;
  t.demands = demands;
  t.original_bytes = files.original_bytes();
  t.padded_bytes = files.padded_bytes();

  auto caches = place_uncoded(config, files);
  t.broadcasts = uncoded_delivery(config, files);
  for (const auto& bc : t.broadcasts)
    t.download_bits.push_back(bc.payload_bits());

  for (int k = 0; k < K; ++k) {
    Bytes decoded =
        decode_uncoded(config, demands[k], caches[k], t.broadcasts, files);
    bool ok = decoded.size() == files.original_bytes() &&
              std::equal(decoded.begin(), decoded.end(),
                         files.file(demands[k]).begin());
    t.success.push_back(ok);
    t.decoded.push_back(std::move(decoded));
  }
  return t;
}

std::vector<int> gen_demands(const SystemConfig& config, std::uint64_t round) {
  StreamRng rng(config.seed, stream::id(stream::kDemands, 0), round);
  std::vector<int> demands(config.users());
  for (int& d : demands) d = rng.next_below(config.files);
  return demands;
}

Bytes encode_query_wire(const Query& query, int servers) {
  const int bps = symbol_bits(servers);
  const int n = static_cast<int>(query.symbols.size()) - 1;
  Bytes wire((static_cast<std::size_t>(n) * bps + 7) / 8, 0);
  std::size_t bit = 0;
  for (int i = 0; i < n; ++i) {
    // The trailing coordinate is implied by the sum constraint and stays home.
    int sym = query.symbols[i];
    for (int b = 0; b < bps; ++b, ++bit)
      if (sym >> b & 1) wire[bit / 8] |= 1 << (bit % 8);
  }
  return wire;
}

Query decode_query_wire(const Bytes& wire, int user, int server, int servers,
                        int files) {
  const int bps = symbol_bits(servers);
  const int n = files - 1;
  if (wire.size() != (static_cast<std::size_t>(n) * bps + 7) / 8)
    throw ProtocolError("query wire size mismatch");
  Query q;
  q.user = user;
  q.server = server;
  q.symbols.resize(files);
  std::size_t bit = 0;
  int sum = 0;
  for (int i = 0; i < n; ++i) {
    int sym = 0;
    for (int b = 0; b < bps; ++b, ++bit)
      if (wire[bit / 8] >> (bit % 8) & 1) sym |= 1 << b;
    if (sym >= servers) throw ProtocolError("query wire symbol outside range");
    q.symbols[i] = sym;
    sum += sym;
  }
  q.symbols[n] = ((server - sum) % servers + servers) % servers;
  return q;
}

}  // namespace mupir
