#include "curvlab/invariants.hpp"

#include "curvlab/errors.hpp"

namespace curvlab {

ToledoRecord toledo(int g, int d) {
  if (g < 2) throw PreconditionError("toledo: g >= 2 required");
  if (d < 0) throw PreconditionError("toledo: d >= 0 required");

  ToledoRecord rec;
  rec.g = g;
  rec.d = d;
  rec.tol = Rational(2 - 2 * static_cast<long long>(g)) + Rational(2 * static_cast<long long>(d), 3);
  rec.degL = 3LL * g - 3 - d;
  if (rec.tol != Rational(-2, 3) * Rational(rec.degL)) {
    throw PreconditionError("toledo: -(2/3) deg L consistency failed");
  }
  rec.liftable = (d % 3 == 0);
  rec.stable = (rec.degL > 0) && (rec.degL < 3LL * g - 3);
  rec.in_af_window = (d > 0) && (d < g - 1);
  rec.milnor_wood_ok =
      rec.tol >= Rational(2 - 2 * static_cast<long long>(g)) &&
      rec.tol <= Rational(2 * static_cast<long long>(g) - 2);
  return rec;
}

std::vector<AfWindowRow> af_window_table(int g_min, int g_max) {
  if (g_min < 2 || g_max < g_min) {
    throw PreconditionError("af_window_table: need 2 <= g_min <= g_max");
  }
  std::vector<AfWindowRow> table;
  for (int g = g_min; g <= g_max; ++g) {
    AfWindowRow row;
    row.g = g;
    for (int d = 1; d < g - 1; ++d) row.admissible.push_back(toledo(g, d));
    table.push_back(std::move(row));
  }
  return table;
}

H4DegreeRecord h4_degree_report(int g, int d) {
  if (g < 2) throw PreconditionError("h4_degree_report: g >= 2 required");
  if (d < 1) throw PreconditionError("h4_degree_report: d >= 1 required");

  H4DegreeRecord rec;
  rec.g = g;
  rec.d = d;
  rec.degL = 4LL * g - 4 - d;
  rec.c = Rational(d, 2LL * g - 2);
  rec.R = Rational(d, 2LL * g - 2);
  if (rec.c != rec.R || rec.c * Rational(2LL * g - 2) != Rational(d)) {
    throw PreconditionError("h4_degree_report: rational identity failed");
  }
  return rec;
}

}  // namespace curvlab
