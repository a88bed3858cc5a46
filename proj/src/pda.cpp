#include "mupir/pda.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace mupir {

Pda::Pda(int users, int subfiles, int stars_per_column, int label_count,
         std::vector<int> cells)
    : users_(users),
      subfiles_(subfiles),
      stars_(stars_per_column),
      labels_(label_count),
      cells_(std::move(cells)) {
  if (users_ <= 0 || subfiles_ <= 0)
    throw std::invalid_argument("Pda: need K >= 1 and F >= 1");
  if (stars_ < 0 || stars_ > subfiles_)
    throw std::invalid_argument("Pda: Z out of range [0:F]");
  if (labels_ < 0) throw std::invalid_argument("Pda: S must be >= 0");
  if (cells_.size() != static_cast<std::size_t>(users_) * subfiles_)
    throw std::invalid_argument("Pda: cell count does not match F*K");
  for (int v : cells_)
    if (v < 0) throw std::invalid_argument("Pda: negative cell value");

  by_label_.resize(labels_);
  for (int f = 0; f < subfiles_; ++f)
    for (int k = 0; k < users_; ++k) {
      int v = at(f, k);
      if (v != kStar && v <= labels_) by_label_[v - 1].emplace_back(f, k);
    }
}

const std::vector<std::pair<int, int>>& Pda::cells_of(int label) const {
  if (label < 1 || label > labels_)
    throw std::out_of_range("cells_of: label out of [1:S]");
  return by_label_[label - 1];
}

std::string_view violation_kind_name(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::C1: return "C1";
    case Violation::Kind::C2: return "C2";
    case Violation::Kind::C3a: return "C3a";
    case Violation::Kind::C3b: return "C3b";
    case Violation::Kind::Label: return "Label";
  }
  return "?";
}

std::string ValidationReport::summary() const {
  if (valid()) return "valid";
  std::ostringstream out;
  out << violations.size() << " violation" << (violations.size() == 1 ? "" : "s");
  for (const auto& v : violations) {
    out << "\n  [" << violation_kind_name(v.kind) << "] " << v.message;
  }
  return out.str();
}

namespace {

std::string cell_name(int row, int col) {
  // 1-based, matching the text format rows/columns a user sees.
  return "(" + std::to_string(row + 1) + "," + std::to_string(col + 1) + ")";
}

}  // namespace

ValidationReport validate(const Pda& pda) {
  ValidationReport report;
  const int K = pda.users();
  const int F = pda.subfiles();
  const int Z = pda.stars_per_column();
  const int S = pda.label_count();

  // Label range first, so the C2/C3 passes below can trust v <= S.
  for (int f = 0; f < F; ++f)
    for (int k = 0; k < K; ++k) {
      int v = pda.at(f, k);
      if (v != kStar && v > S) {
        report.violations.push_back(
            {Violation::Kind::Label,
             {{f + 1, k + 1}},
             "cell " + cell_name(f, k) + " has label " + std::to_string(v) +
                 " outside [1:" + std::to_string(S) + "]"});
      }
    }

  // C1: exactly Z stars in every column.
  for (int k = 0; k < K; ++k) {
    int stars = 0;
    for (int f = 0; f < F; ++f)
      if (pda.is_star(f, k)) ++stars;
    if (stars != Z) {
      report.violations.push_back(
          {Violation::Kind::C1,
           {},
           "column " + std::to_string(k + 1) + " has " + std::to_string(stars) +
               " stars, expected " + std::to_string(Z)});
    }
  }

  // Gather occurrences per in-range label.
  std::vector<std::vector<std::pair<int, int>>> occ(S);
  for (int f = 0; f < F; ++f)
    for (int k = 0; k < K; ++k) {
      int v = pda.at(f, k);
      if (v != kStar && v <= S) occ[v - 1].emplace_back(f, k);
    }

  // C2: every label in [1:S] appears at least once.
  for (int s = 1; s <= S; ++s) {
    if (occ[s - 1].empty()) {
      report.violations.push_back(
          {Violation::Kind::C2,
           {},
           "label " + std::to_string(s) + " does not appear"});
    }
  }

  // C3: for each pair of equal labels, rows and columns must differ (a) and
  // the two crossing cells must be stars (b).
  for (int s = 1; s <= S; ++s) {
    const auto& cells = occ[s - 1];
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        auto [f1, k1] = cells[i];
        auto [f2, k2] = cells[j];
        if (f1 == f2 || k1 == k2) {
          report.violations.push_back(
              {Violation::Kind::C3a,
               {{f1 + 1, k1 + 1}, {f2 + 1, k2 + 1}},
               "label " + std::to_string(s) + " repeats in the same " +
                   (f1 == f2 ? "row" : "column") + " at " + cell_name(f1, k1) +
                   " and " + cell_name(f2, k2)});
          continue;  // crossing cells are not distinct, C3b does not apply
        }
        if (!pda.is_star(f1, k2) || !pda.is_star(f2, k1)) {
          std::vector<std::pair<int, int>> witness = {{f1 + 1, k1 + 1},
                                                      {f2 + 1, k2 + 1}};
          std::string missing;
          if (!pda.is_star(f1, k2)) {
            witness.push_back({f1 + 1, k2 + 1});
            missing = cell_name(f1, k2);
          }
          if (!pda.is_star(f2, k1)) {
            witness.push_back({f2 + 1, k1 + 1});
            missing += (missing.empty() ? "" : " and ") + cell_name(f2, k1);
          }
          report.violations.push_back(
              {Violation::Kind::C3b, std::move(witness),
               "label " + std::to_string(s) + " at " + cell_name(f1, k1) +
                   " and " + cell_name(f2, k2) + ": crossing cell " + missing +
                   " is not a star"});
        }
      }
  }

  return report;
}

OccupancyMap occupancy(const Pda& pda) {
  if (!validate(pda).valid())
    throw std::invalid_argument("occupancy: array violates PDA conditions");
  OccupancyMap map;
  map.columns.resize(pda.label_count());
  for (int s = 1; s <= pda.label_count(); ++s) {
    for (auto [f, k] : pda.cells_of(s)) map.columns[s - 1].push_back(k + 1);
    std::sort(map.columns[s - 1].begin(), map.columns[s - 1].end());
  }
  return map;
}

std::optional<int> regularity(const Pda& pda) {
  if (pda.full_cache()) return std::nullopt;
  OccupancyMap map = occupancy(pda);
  int g = map.size_of(1);
  for (int s = 2; s <= pda.label_count(); ++s)
    if (map.size_of(s) != g) return std::nullopt;
  return g;
}

Rat caching_ratio(const Pda& pda) {
  return Rat(pda.stars_per_column(), pda.subfiles());
}

namespace {

int parse_int_token(const std::string& tok, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw PdaStructureError(std::string("bad ") + what + " token '" + tok + "'");
  return value;
}

}  // namespace

Pda parse_pda(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line))
    throw PdaStructureError("empty input, expected 'K F Z S' header");

  std::istringstream header(line);
  std::string tok;
  std::vector<int> head;
  while (header >> tok) head.push_back(parse_int_token(tok, "header"));
  if (head.size() != 4)
    throw PdaStructureError("header must be 'K F Z S', got " +
                            std::to_string(head.size()) + " tokens");
  const int K = head[0], F = head[1], Z = head[2], S = head[3];
  if (K <= 0 || F <= 0)
    throw PdaStructureError("header requires K >= 1 and F >= 1");
  if (Z < 0 || Z > F) throw PdaStructureError("header requires 0 <= Z <= F");
  if (S < 0) throw PdaStructureError("header requires S >= 0");

  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(F) * K);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::vector<std::string> toks;
    while (row >> tok) toks.push_back(tok);
    if (toks.empty()) continue;  // tolerate blank lines
    if (rows == F)
      throw PdaStructureError("more than " + std::to_string(F) + " rows");
    if (toks.size() != static_cast<std::size_t>(K))
      throw PdaStructureError("row " + std::to_string(rows + 1) + " has " +
                              std::to_string(toks.size()) +
                              " tokens, expected " + std::to_string(K));
    for (const auto& t : toks) {
      if (t == "*") {
        cells.push_back(kStar);
      } else {
        int v = parse_int_token(t, "cell");
        if (v < 1)
          throw PdaStructureError("cell label '" + t + "' must be >= 1 or '*'");
        cells.push_back(v);
      }
    }
    ++rows;
  }
  if (rows != F)
    throw PdaStructureError("expected " + std::to_string(F) + " rows, got " +
                            std::to_string(rows));
  return Pda(K, F, Z, S, std::move(cells));
}

std::string serialize_pda(const Pda& pda) {
  std::ostringstream out;
  out << pda.users() << ' ' << pda.subfiles() << ' ' << pda.stars_per_column()
      << ' ' << pda.label_count() << '\n';
  for (int f = 0; f < pda.subfiles(); ++f) {
    for (int k = 0; k < pda.users(); ++k) {
      if (k > 0) out << ' ';
      if (pda.is_star(f, k))
        out << '*';
      else
        out << pda.at(f, k);
    }
    out << '\n';
  }
  return out.str();
}

Pda load_pda(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PdaStructureError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pda(buf.str());
}

void save_pda(const Pda& pda, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_pda(pda);
}

}  // namespace mupir
