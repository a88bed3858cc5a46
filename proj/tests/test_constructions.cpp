#include "mupir/constructions.hpp"

#include "mupir/rational.hpp"

#include "doctest.h"

using namespace mupir;

TEST_CASE("t-subset array has the classic parameter quadruple") {
  for (int k = 1; k <= 9; ++k) {
    for (int t = 0; t <= k; ++t) {
      CAPTURE(k);
      CAPTURE(t);
      Pda pda = man_pda(k, t);
      CHECK(validate(pda).valid());
      CHECK(pda.users() == k);
      CHECK(Int(pda.subfiles()) == binomial(k, t));
      CHECK(Int(pda.stars_per_column()) == binomial(k - 1, t - 1));
      CHECK(Int(pda.label_count()) == binomial(k, t + 1));
      if (t < k)
        CHECK(regularity(pda) == std::optional<int>(t + 1));
      else
        CHECK(pda.full_cache());
    }
  }
}

TEST_CASE("four users with half the library cached gives a (4,6,3,4) array") {
  Pda pda = man_pda(4, 2);
  CHECK(pda.users() == 4);
  CHECK(pda.subfiles() == 6);
  CHECK(pda.stars_per_column() == 3);
  CHECK(pda.label_count() == 4);
  CHECK(regularity(pda) == std::optional<int>(3));
  CHECK(caching_ratio(pda) == Rat(1, 2));
}

TEST_CASE("no caching collapses to the one-row identity array") {
  Pda pda = man_pda(5, 0);
  CHECK(pda.subfiles() == 1);
  CHECK(pda.stars_per_column() == 0);
  CHECK(pda.label_count() == 5);
  for (int k = 0; k < 5; ++k) CHECK(pda.at(0, k) == k + 1);
}

TEST_CASE("full caching collapses to the one-row all-star array") {
  Pda pda = man_pda(5, 5);
  CHECK(pda.subfiles() == 1);
  CHECK(pda.stars_per_column() == 1);
  CHECK(pda.full_cache());
  for (int k = 0; k < 5; ++k) CHECK(pda.is_star(0, k));
}

TEST_CASE("row labels are ranks among the larger subsets") {
  // K=4, t=1: rows are the singletons {1}..{4}; the label of column k in
  // row {v} is the rank of {v,k} among the 2-subsets of [1:4].
  Pda pda = man_pda(4, 1);
  REQUIRE(pda.subfiles() == 4);
  // Row {1}: pairs {1,2},{1,3},{1,4} have ranks 1,2,3.
  CHECK(pda.is_star(0, 0));
  CHECK(pda.at(0, 1) == 1);
  CHECK(pda.at(0, 2) == 2);
  CHECK(pda.at(0, 3) == 3);
  // Row {3}: {1,3} rank 2, {2,3} rank 4, {3,4} rank 6.
  CHECK(pda.at(2, 0) == 2);
  CHECK(pda.at(2, 1) == 4);
  CHECK(pda.is_star(2, 2));
  CHECK(pda.at(2, 3) == 6);
}

TEST_CASE("construction rejects out-of-range parameters") {
  CHECK_THROWS_AS(man_pda(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(man_pda(4, -1), std::invalid_argument);
  CHECK_THROWS_AS(man_pda(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(man_pda(64, 32), std::invalid_argument);  // cell cap
  CHECK_THROWS_AS(single_user_pda(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(single_user_pda(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(single_user_pda(3, -1), std::invalid_argument);
}

TEST_CASE("one-user column array caches a prefix and labels the rest") {
  Pda pda = single_user_pda(5, 2);
  CHECK(validate(pda).valid());
  CHECK(pda.users() == 1);
  CHECK(pda.subfiles() == 5);
  CHECK(pda.stars_per_column() == 2);
  CHECK(pda.label_count() == 3);
  CHECK(regularity(pda) == std::optional<int>(1));
  CHECK(caching_ratio(pda) == Rat(2, 5));

  SUBCASE("no cache") {
    Pda none = single_user_pda(3, 0);
    CHECK(none.label_count() == 3);
    CHECK(validate(none).valid());
  }
  SUBCASE("full cache") {
    Pda full = single_user_pda(3, 3);
    CHECK(full.full_cache());
    CHECK(validate(full).valid());
  }
  SUBCASE("single cell") {
    CHECK(single_user_pda(1, 0) == Pda());
  }
}

TEST_CASE("catalog entries are valid and stable") {
  const auto& cat = example_pdas();
  CHECK(cat.size() == 3);
  CHECK(cat.count("trivial") == 1);
  CHECK(cat.count("irregular") == 1);
  CHECK(cat.count("regular") == 1);
  for (const auto& [name, pda] : cat) {
    CAPTURE(name);
    CHECK(validate(pda).valid());
  }
  CHECK(cat.at("trivial") == Pda());
}
