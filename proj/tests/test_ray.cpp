#include "doctest.h"

#include <cmath>
#include <random>

#include "curvlab/elliptic.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/mesh.hpp"
#include "curvlab/ray.hpp"
#include "curvlab/sections.hpp"
#include "curvlab/surface.hpp"

using namespace curvlab;

namespace {

const Surface& octagon4() {
  static Surface s = Surface::uniformize(regular_octagon_genus2(4));
  return s;
}

ScalarField section_data(const Surface& s) {
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  return spec.f_alpha;
}

}  // namespace

TEST_CASE("parameter grid has exact endpoints and clustered interior") {
  std::vector<double> grid = chebyshev_grid(2.0, 9);
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 2.0);
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  // Chebyshev points cluster toward the ends: the first interior gap is
  // smaller than the middle gap.
  CHECK(grid[1] - grid[0] < grid[5] - grid[4]);
  CHECK_THROWS_AS((void)chebyshev_grid(-1.0, 9), PreconditionError);
  CHECK_THROWS_AS((void)chebyshev_grid(1.0, 1), PreconditionError);
}

TEST_CASE("admissible horizon matches the closed form") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  double expect = eta / (std::pow(2.0 + eta, 3) * field_max(f));
  CHECK(max_admissible_t(f, eta) == doctest::Approx(expect).epsilon(1e-15));
  Eigen::VectorXd neg = Eigen::VectorXd::Zero(s.n_vertices());
  neg[0] = -1.0;
  CHECK_THROWS_AS((void)max_admissible_t(s.field(neg), eta), PreconditionError);
  CHECK(std::isinf(max_admissible_t(s.field(0.0), eta)));
}

TEST_CASE("family of solutions starts at the zero-data constant") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  std::vector<double> grid = chebyshev_grid(0.5 * max_admissible_t(f, eta), 7);
  RayProfile profile = solve_ray(s, f, eta, grid);
  REQUIRE(profile.u.size() == grid.size());
  REQUIRE(profile.F.size() == grid.size());
  // t = 0 decouples the data: u is the constant -ln(2)/2 and the volume-
  // normalized functional starts at 1/2.
  CHECK((profile.u[0].values().array() + 0.5 * std::log(2.0)).abs().maxCoeff() <=
        1e-10);
  CHECK(profile.F[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("functional along the family is nonincreasing and concave") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  std::vector<double> grid = chebyshev_grid(0.8 * max_admissible_t(f, eta), 13);
  RayProfile profile = solve_ray(s, f, eta, grid);
  for (size_t i = 1; i < profile.F.size(); ++i)
    CHECK(profile.F[i] <= profile.F[i - 1] + 1e-12);
  std::vector<double> dd = f_second_differences(profile);
  for (double v : dd) CHECK(v <= 1e-8);
}

TEST_CASE("first and second parameter derivatives verify the slope identity") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  std::vector<double> grid = chebyshev_grid(0.6 * max_admissible_t(f, eta), 9);
  RayProfile profile = solve_ray(s, f, eta, grid);
  ray_derivatives(s, profile);
  REQUIRE(profile.has_derivatives);
  REQUIRE(profile.udot.size() == grid.size());
  REQUIRE(profile.udot_max.size() == grid.size());
  // u decreases along the family and the concavity combination stays
  // nonpositive pointwise, up to solver noise.
  for (double m : profile.udot_max) CHECK(m <= 1e-8);
  for (double m : profile.uddot_combo_max) CHECK(m <= 1e-8);

  SlopeReport slope = check_slope_inequality(profile);
  CHECK(slope.holds_all);
  CHECK(slope.max_violation <= 1e-9);
  CHECK(slope.slope_exact == doctest::Approx(-2.0 * mean(f)).epsilon(1e-12));
  CHECK(slope.rel_err <= 2e-2);  // first-order difference on a 9-point grid
}

TEST_CASE("the family rejects parameters beyond the admissible horizon") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  double t_max = max_admissible_t(f, eta);
  std::vector<double> grid = {0.0, 0.5 * t_max, 1.5 * t_max};
  CHECK_THROWS_AS((void)solve_ray(s, f, eta, grid), PreconditionError);
  CHECK_THROWS_AS((void)solve_ray(s, f, eta, {0.5, 0.2}), PreconditionError);
}

TEST_CASE("volume prescription hits the target mean for constant data") {
  const Surface& s = octagon4();
  double eta = 0.5;
  double R = 0.05;
  ScalarField f = s.field(1.0);
  VolumeSolve vs = solve_gauss_with_volume(s, f, eta, R);
  // Constant data: mean(e^{2u}) = 1/2 - R forces the scalar equation
  // 2(1/2-R) - 1 + t (1/2-R)^{-2} = 0, i.e. t = 2R(1/2-R)^2.
  double t_exact = 2.0 * R * std::pow(0.5 - R, 2);
  CHECK(vs.t == doctest::Approx(t_exact).epsilon(1e-7));
  CHECK(std::abs(vs.achieved_mean - (0.5 - R)) <= 1e-8);
  CHECK(vs.balance == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(vs.evaluations > 0);
  CHECK(vs.target_R == R);
}

TEST_CASE("volume prescription fails loudly when the data is too lopsided") {
  const Surface& s = octagon4();
  double eta = 0.5;
  // A spiky field has tiny mean/sup ratio; a large target volume defect is
  // then unreachable within the admissible range.
  SectionNormSpec spec = build_section_norm(s, {{0, 2}, {5, 2}});
  CHECK_THROWS_AS((void)solve_gauss_with_volume(s, spec.f_alpha, eta, 0.2),
                  PreconditionError);
  CHECK_THROWS_AS((void)solve_gauss_with_volume(s, s.field(1.0), eta, 0.5),
                  PreconditionError);
  CHECK_THROWS_AS((void)solve_gauss_with_volume(s, s.field(1.0), eta, 0.0),
                  PreconditionError);
}

TEST_CASE("volume prescription respects the balance gate") {
  const Surface& s = octagon4();
  double eta = 0.5;
  ScalarField f = section_data(s);
  double bal = balance_ratio(f);
  // Feasible iff bal >= (2+eta)^3 R / (2 eta): pick R at 90% of the cap.
  double R_ok = 0.9 * bal * 2.0 * eta / std::pow(2.0 + eta, 3);
  VolumeSolve vs = solve_gauss_with_volume(s, f, eta, R_ok);
  CHECK(std::abs(vs.achieved_mean - (0.5 - R_ok)) <= 1e-8);
  CHECK(vs.required_balance == doctest::Approx(std::pow(2.0 + eta, 3) * R_ok /
                                               (2.0 * eta)));
  double R_bad = 1.1 * bal * 2.0 * eta / std::pow(2.0 + eta, 3);
  CHECK_THROWS_AS((void)solve_gauss_with_volume(s, f, eta, R_bad),
                  PreconditionError);
}
