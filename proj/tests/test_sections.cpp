#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "curvlab/errors.hpp"
#include "curvlab/mesh.hpp"
#include "curvlab/sections.hpp"
#include "curvlab/surface.hpp"
#include "curvlab/systole.hpp"

using namespace curvlab;

namespace {

const Surface& octagon4() {
  static Surface s = Surface::uniformize(regular_octagon_genus2(4));
  return s;
}

}  // namespace

TEST_CASE("log-norm potential solves the point-load equation") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}, {17, 1}});
  CHECK(spec.degree == 2);
  CHECK(spec.distributional_residual <= 1e-10);
  CHECK(std::abs(mean(spec.psi)) <= 1e-12);
}

TEST_CASE("zero multiplicities add up to the degree") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{3, 2}, {40, 1}});
  CHECK(spec.degree == 3);
  REQUIRE(static_cast<int>(spec.zeros.size()) == 2);
}

TEST_CASE("sup normalization places the max at one") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  CHECK(field_max(spec.f_alpha) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(field_min(spec.f_alpha) > 0.0);
  // The squared-norm surrogate is smallest at the prescribed zero.
  const auto& v = spec.f_alpha.values();
  int argmin = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] < v[argmin]) argmin = i;
  CHECK(argmin == 0);
  CHECK(spec.scale > 0.0);
}

TEST_CASE("L2 normalization is the same field rescaled") {
  const Surface& s = octagon4();
  SectionNormSpec sup_spec = build_section_norm(s, {{7, 1}}, ScaleMode::kSupOne);
  SectionNormSpec l2_spec = build_section_norm(s, {{7, 1}}, ScaleMode::kL2One);
  CHECK(l2_norm(l2_spec.f_alpha) == doctest::Approx(1.0).epsilon(1e-12));
  // Balance is scale-free, so both normalizations report the same value.
  CHECK(sup_spec.bal == doctest::Approx(l2_spec.bal).epsilon(1e-13));
  double ratio = l2_spec.f_alpha[3] / sup_spec.f_alpha[3];
  CHECK(l2_spec.f_alpha[11] == doctest::Approx(ratio * sup_spec.f_alpha[11])
                                   .epsilon(1e-12));
}

TEST_CASE("balance ratio matches the direct quotient") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  CHECK(spec.bal == doctest::Approx(mean(spec.f_alpha) / field_max(spec.f_alpha))
                        .epsilon(1e-13));
  CHECK(spec.bal > 0.0);
  CHECK(spec.bal <= 1.0);
}

TEST_CASE("more zeros spread the mass thinner") {
  const Surface& s = octagon4();
  double bal1 = build_section_norm(s, {{0, 1}}).bal;
  double bal4 = build_section_norm(s, {{0, 1}, {17, 1}, {40, 1}, {55, 1}}).bal;
  CHECK(bal4 < bal1);
}

TEST_CASE("zone split reports off-zone flatness near one") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  SystoleEstimate sys = systole(s);
  double r = 0.25 * sys.value;
  FgbalBounds b = check_fgbal_bounds(spec, r, sys.value);
  CHECK(b.r == r);
  CHECK(b.on_zone_size + b.off_zone_size == s.n_vertices());
  CHECK(b.on_zone_size > 0);
  CHECK(b.off_zone_inf > 0.0);
  CHECK(b.off_zone_inf <= 1.0);
  CHECK(b.C1 > 0.0);
  CHECK(b.C2 > 0.0);
  CHECK_THROWS_AS((void)check_fgbal_bounds(spec, 0.6 * sys.value, sys.value),
                  PreconditionError);
}

TEST_CASE("graph distances are metric-consistent") {
  const Surface& s = octagon4();
  std::vector<double> dist = graph_distances(s, {0});
  CHECK(dist[0] == 0.0);
  CHECK(*std::min_element(dist.begin(), dist.end()) == 0.0);
  CHECK(*std::max_element(dist.begin(), dist.end()) > 0.0);
  // One-edge relaxation: no vertex is farther than a neighbor plus the edge.
  const auto& mesh = s.mesh();
  for (int v = 0; v < s.n_vertices(); ++v) {
    for (int w : mesh.vertex_neighbors(v)) {
      int e = mesh.edge_between(v, w);
      CHECK(dist[w] <= dist[v] + s.conformal_edge_length(e) + 1e-12);
    }
  }
  std::vector<double> dist2 = graph_distances(s, {0, 5});
  CHECK(dist2[5] == 0.0);
  for (int v = 0; v < s.n_vertices(); ++v) CHECK(dist2[v] <= dist[v] + 1e-12);
}

TEST_CASE("invalid zero prescriptions are rejected") {
  const Surface& s = octagon4();
  CHECK_THROWS_AS((void)build_section_norm(s, {}), PreconditionError);
  CHECK_THROWS_AS((void)build_section_norm(s, {{-1, 1}}), PreconditionError);
  CHECK_THROWS_AS((void)build_section_norm(s, {{0, 0}}), PreconditionError);
  CHECK_THROWS_AS((void)build_section_norm(s, {{s.n_vertices(), 1}}),
                  PreconditionError);
}
