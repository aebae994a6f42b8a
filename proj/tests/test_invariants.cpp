#include "doctest.h"

#include <random>

#include "curvlab/errors.hpp"
#include "curvlab/invariants.hpp"

using namespace curvlab;

TEST_CASE("known invariant values come out exactly") {
  ToledoRecord r21 = toledo(2, 1);
  CHECK(r21.tol == Rational(-4, 3));
  CHECK(r21.degL == 2);
  CHECK(!r21.liftable);
  CHECK(r21.stable);
  CHECK(!r21.in_af_window);  // window 0 < d < g-1 is empty at g = 2
  CHECK(r21.milnor_wood_ok);

  ToledoRecord r33 = toledo(3, 3);
  CHECK(r33.tol == Rational(-2));
  CHECK(r33.liftable);
  CHECK(r33.degL == 3);

  ToledoRecord r20 = toledo(2, 0);
  CHECK(r20.tol == Rational(-2));
  CHECK(!r20.in_af_window);
  CHECK(r20.liftable);
}

TEST_CASE("invariant identities hold for random parameters") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> gd(2, 400);
  for (int trial = 0; trial < 1000; ++trial) {
    int g = gd(rng);
    std::uniform_int_distribution<int> dd(0, 3 * g - 3);
    int d = dd(rng);
    ToledoRecord r = toledo(g, d);
    CHECK(r.degL == 3 * g - 3 - d);
    CHECK(r.tol == Rational(-2 * r.degL, 3));
    CHECK(r.tol == Rational(2 - 2 * g) + Rational(2 * d, 3));
    CHECK(r.liftable == (d % 3 == 0));
    CHECK(r.stable == (0 < r.degL && r.degL < 3 * g - 3));
    CHECK(r.in_af_window == (0 < d && d < g - 1));
    CHECK(r.milnor_wood_ok ==
          (Rational(2 - 2 * g) <= r.tol && r.tol <= Rational(2 * g - 2)));
  }
}

TEST_CASE("parameter gates reject out-of-range input") {
  CHECK_THROWS_AS((void)toledo(1, 0), PreconditionError);
  CHECK_THROWS_AS((void)toledo(2, -1), PreconditionError);
}

TEST_CASE("zero counts past the bundle degree stay bookkeeping, not errors") {
  // d > 3g-3 drives deg L negative; the record carries the judgment in its
  // flags instead of refusing the input.
  ToledoRecord over = toledo(2, 4);
  CHECK(over.degL == -1);
  CHECK(!over.stable);
  CHECK(over.milnor_wood_ok);  // tol = 2/3 still inside [-2, 2]

  // The two-sided bound holds across d in [0, 6g-6] and first breaks just
  // above it.
  for (int d = 0; d <= 6; ++d) CHECK(toledo(2, d).milnor_wood_ok);
  CHECK(!toledo(2, 7).milnor_wood_ok);
}

TEST_CASE("window table matches the strict band") {
  std::vector<AfWindowRow> table = af_window_table(2, 6);
  REQUIRE(table.size() == 5);
  CHECK(table[0].g == 2);
  CHECK(table[0].admissible.empty());
  CHECK(table[1].g == 3);
  REQUIRE(table[1].admissible.size() == 1);
  CHECK(table[1].admissible[0].d == 1);

  const AfWindowRow& g5 = table[3];
  CHECK(g5.g == 5);
  REQUIRE(g5.admissible.size() == 3);
  CHECK(g5.admissible[0].d == 1);
  CHECK(g5.admissible[0].tol == Rational(-22, 3));
  CHECK(g5.admissible[1].d == 2);
  CHECK(g5.admissible[1].tol == Rational(-20, 3));
  CHECK(g5.admissible[2].d == 3);
  CHECK(g5.admissible[2].tol == Rational(-6));
  for (const auto& row : table)
    for (const auto& rec : row.admissible) {
      CHECK(rec.in_af_window);
      CHECK(rec.stable);
    }
  CHECK_THROWS_AS((void)af_window_table(1, 5), PreconditionError);
  CHECK_THROWS_AS((void)af_window_table(5, 2), PreconditionError);
}

TEST_CASE("disc-bundle bookkeeping reports the exact curvature scale") {
  H4DegreeRecord r = h4_degree_report(2, 1);
  CHECK(r.degL == 3);
  CHECK(r.c == Rational(1, 2));
  CHECK(r.R == r.c);

  H4DegreeRecord big = h4_degree_report(7, 4);
  CHECK(big.degL == 4 * 7 - 4 - 4);
  CHECK(big.c == Rational(4, 12));
  CHECK(big.c == Rational(1, 3));  // reduced form

  std::mt19937 rng(77);
  std::uniform_int_distribution<int> gd(2, 500);
  for (int trial = 0; trial < 200; ++trial) {
    int g = gd(rng);
    std::uniform_int_distribution<int> dd(1, 4 * g - 5);
    int d = dd(rng);
    H4DegreeRecord rec = h4_degree_report(g, d);
    CHECK(rec.degL == 4 * g - 4 - d);
    CHECK(rec.c == Rational(d, 2 * g - 2));
    CHECK(rec.R == rec.c);
  }
  CHECK_THROWS_AS((void)h4_degree_report(1, 1), PreconditionError);
  CHECK_THROWS_AS((void)h4_degree_report(2, 0), PreconditionError);
}
