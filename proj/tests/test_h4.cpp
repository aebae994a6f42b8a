#include "doctest.h"

#include <cmath>

#include "curvlab/errors.hpp"
#include "curvlab/h4.hpp"
#include "curvlab/mesh.hpp"
#include "curvlab/sections.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

using namespace curvlab;

namespace {

const Surface& octagon4() {
  static Surface s = Surface::uniformize(regular_octagon_genus2(4));
  return s;
}

const GeometryConstants& constants() {
  static GeometryConstants gc = poisson_constant(octagon4());
  return gc;
}

}  // namespace

TEST_CASE("admissible horizon matches the four-space cap") {
  const Surface& s = octagon4();
  double eta = 0.25;
  ScalarField f = s.field(2.0);
  CHECK(max_admissible_t_h4(f, eta) ==
        doctest::Approx(16.0 * eta / (std::pow(4.0 + eta, 3) * 2.0))
            .epsilon(1e-15));
  CHECK(std::isinf(max_admissible_t_h4(s.field(0.0), eta)));
  CHECK_THROWS_AS((void)max_admissible_t_h4(f, 0.6), PreconditionError);
}

TEST_CASE("constant data has the closed-form solution") {
  const Surface& s = octagon4();
  double eta = 0.25;
  double R = 0.002;
  double c = 3.0;
  H4GaussSolution sol = solve_gauss_h4(s, s.field(c), eta, R);
  double u_star = 0.5 * std::log(1.0 - R);
  CHECK((sol.u.values().array() - u_star).abs().maxCoeff() <= 1e-8);
  CHECK(std::abs(sol.t - R * std::pow(1.0 - R, 2) / c) <= 1e-7);
  // The volume match is certified on the half-scale mean, so the full-scale
  // gap can reach twice the solver tolerance.
  CHECK(std::abs(sol.achieved_mean - (1.0 - R)) <= 2.5e-8);
  CHECK(sol.bracket_ok);
  CHECK(sol.residual_sup <= 1e-8);
  CHECK(sol.af_sup <= eta / 4.0 + 1e-9);
  CHECK(sol.balance == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sol.bracket_hi() == 0.0);
  CHECK(sol.bracket_lo() ==
        doctest::Approx(0.5 * std::log(4.0 / (4.0 + eta))).epsilon(1e-15));
}

TEST_CASE("vanishing volume defect forces the flat solution") {
  const Surface& s = octagon4();
  H4GaussSolution sol = solve_gauss_h4(s, s.field(1.0), 0.25, 1e-8);
  CHECK(sup_abs(sol.u) <= 1e-6);
  CHECK(sol.t <= 1e-7);
}

TEST_CASE("reduction path and native Newton path agree") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  double eta = 0.25;
  double R = 0.001;
  H4GaussOptions opts;
  opts.native_check = true;
  opts.require_stated_balance = false;
  H4GaussSolution sol = solve_gauss_h4(s, spec.f_alpha, eta, R, opts);
  CHECK(sol.native_checked);
  CHECK(sol.two_path_gap <= 1e-10);
  CHECK(sol.residual_sup <= 1e-8);
  CHECK(sol.bracket_ok);
}

TEST_CASE("bad data and parameters are rejected") {
  const Surface& s = octagon4();
  CHECK_THROWS_AS((void)solve_gauss_h4(s, s.field(1.0), 0.5, 0.01),
                  PreconditionError);  // eta must be < 1/2
  CHECK_THROWS_AS((void)solve_gauss_h4(s, s.field(1.0), 0.25, 0.0),
                  PreconditionError);
  CHECK_THROWS_AS((void)solve_gauss_h4(s, s.field(1.0), 0.25, 1.0),
                  PreconditionError);
  Eigen::VectorXd neg = Eigen::VectorXd::Zero(s.n_vertices());
  neg[1] = -0.5;
  CHECK_THROWS_AS((void)solve_gauss_h4(s, s.field(neg), 0.25, 0.01),
                  PreconditionError);
}

TEST_CASE("stated balance gate is stricter than the reduction gate") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 2}, {17, 2}});
  double eta = 0.25;
  // Choose R between the two gates: reduction needs bal >= (4+eta)^3 R/(16
  // eta), the stated hypothesis needs bal >= (8+eta)^3 R/(16 eta).
  double bal = spec.bal;
  double R_mid = 0.5 * (bal * 16.0 * eta / std::pow(8.0 + eta, 3) +
                        bal * 16.0 * eta / std::pow(4.0 + eta, 3));
  H4GaussOptions strict;
  strict.require_stated_balance = true;
  CHECK_THROWS_AS((void)solve_gauss_h4(s, spec.f_alpha, eta, R_mid, strict),
                  PreconditionError);
  H4GaussOptions relaxed;
  relaxed.require_stated_balance = false;
  H4GaussSolution sol = solve_gauss_h4(s, spec.f_alpha, eta, R_mid, relaxed);
  CHECK(std::abs(sol.achieved_mean - (1.0 - R_mid)) <= 3e-8);
}

TEST_CASE("hypothesis report evaluates the advertised inequality") {
  const Surface& s = octagon4();
  H4Problem p;
  p.surface = &s;
  p.f = s.field(1.0);
  p.eta = 0.25;
  p.R = 0.002;
  p.A = 1.0;
  p.C = constants().poisson_constant();
  p.vol = s.volume();
  H4HypothesisReport h = check_hypothesis_h4(p);
  CHECK(h.bal == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.lhs == doctest::Approx(p.A * std::exp(-4.0 * p.C * p.eta *
                                                std::sqrt(p.vol) / (4.0 + p.eta)))
                     .epsilon(1e-14));
  CHECK(h.rhs == doctest::Approx(std::pow(8.0 + p.eta, 3) * p.R / (16.0 * p.eta))
                     .epsilon(1e-14));
  CHECK(h.w_radius == doctest::Approx(p.C * p.eta * std::sqrt(p.vol) /
                                      (4.0 + p.eta))
                          .epsilon(1e-14));
  CHECK(h.bal_ok);
}

TEST_CASE("constant data converges in one step with the exact triple") {
  const Surface& s = octagon4();
  double eta = 0.25;
  double R = 0.002;
  double c = 2.0;
  H4Problem p;
  p.surface = &s;
  p.f = s.field(c);
  p.eta = eta;
  p.R = R;
  p.A = 1.0;
  p.C = constants().poisson_constant();
  p.vol = s.volume();
  REQUIRE(check_hypothesis_h4(p).ok());
  H4Options opts;
  opts.constants = &constants();
  opts.volume_tol = 1e-10;
  opts.drift_tol = 1e-12;
  H4Certificate cert = run_fixed_point_h4(p, opts);
  CHECK(cert.converged);
  CHECK(cert.iterations == 1);
  double u_star = 0.5 * std::log(1.0 - R);
  CHECK((cert.u.values().array() - u_star).abs().maxCoeff() <= 1e-8);
  CHECK(sup_abs(cert.w) <= 1e-8);
  CHECK(std::abs(cert.t - R * std::pow(1.0 - R, 2) / c) <= 1e-8);
  // v = w - u exactly as stored.
  CHECK((cert.v.values() - (cert.w.values() - cert.u.values())).cwiseAbs()
            .maxCoeff() == 0.0);
  // af = e^{-6u} t c = R/(1-R) for the constant fixed point.
  CHECK(cert.af_bound_w == doctest::Approx(R / (1.0 - R)).epsilon(1e-6));
  CHECK(cert.af_identity_gap <= 1e-14);
  CHECK(cert.w_ok);
  CHECK(cert.residual_gauss_w <= 1e-8);
  CHECK(cert.residual_poisson_w <= 1e-8);
  CHECK(cert.residual_gauss_v <= 1e-8);
  CHECK(cert.residual_poisson_v <= 1e-8);
  CHECK(cert.fixed_point_gap <= 1e-10);
}

TEST_CASE("section data converges with both residual forms small") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  H4Problem p;
  p.surface = &s;
  p.f = spec.f_alpha;
  p.eta = 0.25;
  p.R = 0.0005;
  p.A = spec.bal;
  p.C = constants().poisson_constant();
  p.vol = s.volume();
  H4Options opts;
  opts.constants = &constants();
  opts.override_hypothesis = !check_hypothesis_h4(p).ok();
  H4Certificate cert = run_fixed_point_h4(p, opts);
  CHECK(cert.converged);
  CHECK(cert.residual_gauss_w <= 1e-6);
  CHECK(cert.residual_poisson_w <= 1e-6);
  CHECK(cert.residual_gauss_v <= 1e-6);
  CHECK(cert.residual_poisson_v <= 1e-6);
  CHECK(cert.af_identity_gap <= 1e-14);
  CHECK(cert.w_sup <= cert.w_radius);
  CHECK(cert.w_ok);
  CHECK(cert.two_path_gap <= 1e-8);
  REQUIRE(!cert.history.empty());
  CHECK(cert.history.back().w_ok);
}

TEST_CASE("hypothesis failures stop the run unless overridden") {
  const Surface& s = octagon4();
  H4Problem p;
  p.surface = &s;
  p.f = s.field(1.0);
  p.eta = 0.25;
  p.R = 0.05;  // pushes rhs beyond lhs for the measured constants
  p.A = 1.0;
  p.C = constants().poisson_constant();
  p.vol = s.volume();
  REQUIRE(!check_hypothesis_h4(p).ok());
  H4Options opts;
  opts.constants = &constants();
  CHECK_THROWS_AS((void)run_fixed_point_h4(p, opts), PreconditionError);
  opts.override_hypothesis = true;
  H4Certificate cert = run_fixed_point_h4(p, opts);
  CHECK(cert.hypothesis_overridden);
  CHECK(cert.converged);
}
