#pragma once

#include "mupir/pda.hpp"

#include <map>
#include <string>

namespace mupir {

// Maddah-Ali/Niesen style array for K users with integer cache parameter
// t = K*M/N. Rows are the t-subsets of [1:K] in lexicographic order; the cell
// for a non-member k is the lexicographic rank of T+{k} among (t+1)-subsets.
// Result is (t+1)-regular with shape (K, C(K,t), C(K-1,t-1), C(K,t+1)).
// t = K degenerates to a single all-star row (S = 0, nothing to deliver).
Pda man_pda(int users, int t);

// One column: Z stars on top, then labels 1..F-Z. The K=1 case of the
// general machinery, useful as a cross-check against closed-form rates.
Pda single_user_pda(int subfiles, int stars);

// Built-in demo arrays used throughout the tests and the CLI:
//   "trivial"   (1,1,0,1) single cell
//   "irregular" (8,6,3,11) with label occupancies of mixed sizes 1..3
//   "regular"   (6,4,2,4), 3-regular
const std::map<std::string, Pda>& example_pdas();

}  // namespace mupir
