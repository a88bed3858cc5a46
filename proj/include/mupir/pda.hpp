#pragma once

#include "mupir/rational.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mupir {

// Grid cell value 0 encodes the star symbol; labels are 1-based in [1:S].
inline constexpr int kStar = 0;

// Thrown for malformed input that cannot even be represented as a grid
// (ragged rows, bad header, bad tokens). Distinct from condition violations,
// which are collected into a ValidationReport.
class PdaStructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An F x K placement delivery array: stars mark cached subfiles, equal
// integers mark subfiles served by one coded transmission.
//
// A Pda object is immutable and shape-checked on construction; whether it
// satisfies the PDA conditions is a separate question answered by validate().
class Pda {
 public:
  // cells is row-major F*K, 0 = star, positive = label. Declared Z and S are
  // carried along and cross-checked against the grid by validate().
  Pda(int users, int subfiles, int stars_per_column, int label_count,
      std::vector<int> cells);

  // Smallest valid array: one user, one uncached subfile.
  Pda() : Pda(1, 1, 0, 1, {1}) {}

  int users() const { return users_; }              // K
  int subfiles() const { return subfiles_; }        // F
  int stars_per_column() const { return stars_; }   // Z
  int label_count() const { return labels_; }       // S

  int at(int row, int col) const { return cells_[row * users_ + col]; }
  bool is_star(int row, int col) const { return at(row, col) == kStar; }

  // Degenerate all-star array (S = 0): every user caches everything and the
  // delivery phase has nothing to send.
  bool full_cache() const { return labels_ == 0; }

  // Cells labeled s (0-based coordinates), in row order. Only meaningful for
  // s in [1:S] on arrays that validate.
  const std::vector<std::pair<int, int>>& cells_of(int label) const;

  bool operator==(const Pda& other) const = default;

 private:
  int users_;
  int subfiles_;
  int stars_;
  int labels_;
  std::vector<int> cells_;
  std::vector<std::vector<std::pair<int, int>>> by_label_;  // index s-1
};

struct Violation {
  enum class Kind { C1, C2, C3a, C3b, Label };
  Kind kind;
  // Witnessing cells, 1-based (row, column) as in the text format.
  std::vector<std::pair<int, int>> cells;
  std::string message;
};

std::string_view violation_kind_name(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
  std::string summary() const;
};

// Checks C1 (Z stars per column), C2 (every label in [1:S] present), C3
// (equal labels in distinct rows/columns with starred crossings) and label
// range. Collects every violation instead of failing fast.
ValidationReport validate(const Pda& pda);

// For each label s, the set of columns containing s (1-based ids, sorted).
struct OccupancyMap {
  std::vector<std::vector<int>> columns;  // index s-1
  const std::vector<int>& of(int label) const { return columns[label - 1]; }
  int size_of(int label) const { return static_cast<int>(of(label).size()); }
};

// Requires a valid array; throws std::invalid_argument otherwise.
OccupancyMap occupancy(const Pda& pda);

// g when every label occupies exactly g columns, absent otherwise
// (including the degenerate S = 0 array).
std::optional<int> regularity(const Pda& pda);

// Cache fraction M/N = Z/F, exact.
Rat caching_ratio(const Pda& pda);

// Text format: header "K F Z S", then F rows of K whitespace-separated
// tokens, each "*" or a decimal label.
Pda parse_pda(std::string_view text);
std::string serialize_pda(const Pda& pda);

Pda load_pda(const std::filesystem::path& path);
void save_pda(const Pda& pda, const std::filesystem::path& path);

}  // namespace mupir
