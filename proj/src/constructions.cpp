#include "mupir/constructions.hpp"

#include "mupir/rational.hpp"

#include <limits>
#include <stdexcept>

namespace mupir {

namespace {

// 1-based lexicographic rank of a sorted m-subset of [1:K]. Standard
// combinatorial counting: for every value we could have placed below the
// actual element, count the completions.
Int subset_rank(const std::vector<int>& subset, int K) {
  const int m = static_cast<int>(subset.size());
  Int rank = 1;
  int prev = 0;
  for (int i = 0; i < m; ++i) {
    for (int v = prev + 1; v < subset[i]; ++v)
      rank += binomial(K - v, m - i - 1);
    prev = subset[i];
  }
  return rank;
}

// Advance a sorted t-subset of [1:K] to its lexicographic successor.
// Returns false after the last subset.
bool next_subset(std::vector<int>& subset, int K) {
  const int t = static_cast<int>(subset.size());
  for (int i = t - 1; i >= 0; --i) {
    if (subset[i] < K - (t - 1 - i)) {
      ++subset[i];
      for (int j = i + 1; j < t; ++j) subset[j] = subset[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

Pda man_pda(int users, int t) {
  const int K = users;
  if (K < 1) throw std::invalid_argument("man_pda: need K >= 1");
  if (t < 0 || t > K) throw std::invalid_argument("man_pda: t outside [0:K]");

  const Int rows = binomial(K, t);
  const Int labels = binomial(K, t + 1);
  const Int stars = binomial(K - 1, t - 1);
  const Int cell_count = rows * K;
  if (cell_count > 50'000'000)
    throw std::invalid_argument("man_pda: C(K,t)*K cells exceed the 5e7 cap");
  if (labels > std::numeric_limits<int>::max())
    throw std::invalid_argument("man_pda: label count does not fit int");

  const int F = rows.convert_to<int>();
  const int Z = stars.convert_to<int>();
  const int S = labels.convert_to<int>();

  std::vector<int> cells(static_cast<std::size_t>(F) * K, kStar);
  std::vector<int> subset(t);
  for (int i = 0; i < t; ++i) subset[i] = i + 1;
  std::vector<bool> member(K + 1);
  std::vector<int> extended(t + 1);
  int row = 0;
  do {
    member.assign(K + 1, false);
    for (int v : subset) member[v] = true;
    for (int k = 1; k <= K; ++k) {
      if (member[k]) continue;
      // Build T+{k} sorted, then rank it among the (t+1)-subsets.
      int pos = 0;
      for (int v : subset) extended[pos++] = v;
      extended[pos] = k;
      for (int i = pos; i > 0 && extended[i] < extended[i - 1]; --i)
        std::swap(extended[i], extended[i - 1]);
      cells[static_cast<std::size_t>(row) * K + (k - 1)] =
          subset_rank(extended, K).convert_to<int>();
    }
    ++row;
  } while (t > 0 && next_subset(subset, K));

  return Pda(K, F, Z, S, std::move(cells));
}

Pda single_user_pda(int subfiles, int stars) {
  const int F = subfiles;
  const int Z = stars;
  if (F < 1) throw std::invalid_argument("single_user_pda: need F >= 1");
  if (Z < 0 || Z > F)
    throw std::invalid_argument("single_user_pda: Z outside [0:F]");
  std::vector<int> cells(F);
  for (int f = 0; f < F; ++f) cells[f] = f < Z ? kStar : f - Z + 1;
  return Pda(1, F, Z, F - Z, std::move(cells));
}

const std::map<std::string, Pda>& example_pdas() {
  static const std::map<std::string, Pda> catalog = [] {
    std::map<std::string, Pda> m;
    m.emplace("trivial", parse_pda("1 1 0 1\n1\n"));
    m.emplace("irregular", parse_pda("8 6 3 11\n"
                                     "* * * * 2 1 * 4\n"
                                     "* * * 1 * * 2 5\n"
                                     "* * * 4 5 7 8 *\n"
                                     "1 2 3 * * * * 10\n"
                                     "4 5 6 * * 10 11 *\n"
                                     "7 8 9 10 11 * * *\n"));
    m.emplace("regular", parse_pda("6 4 2 4\n"
                                   "* * 1 * 2 3\n"
                                   "* 1 * 2 * 4\n"
                                   "1 * * 3 4 *\n"
                                   "2 3 4 * * *\n"));
    return m;
  }();
  return catalog;
}

}  // namespace mupir
