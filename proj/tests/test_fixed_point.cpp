#include "doctest.h"

#include <cmath>

#include "curvlab/elliptic.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/fixed_point.hpp"
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

FixedPointProblem constant_problem(double R) {
  FixedPointProblem p;
  p.surface = &octagon4();
  p.f = octagon4().field(1.0);
  p.eta = 0.5;
  p.R = R;
  p.A = 1.0;
  p.C = constants().poisson_constant();
  p.vol = octagon4().volume();
  return p;
}

}  // namespace

TEST_CASE("certificate radius matches its closed form") {
  CHECK(u3_radius(2.0, 0.5, 4.0) ==
        doctest::Approx(3.0 * 2.0 * 0.5 * 2.0 / (2.0 * 2.5)).epsilon(1e-15));
  CHECK_THROWS_AS((void)u3_radius(-1.0, 0.5, 4.0), PreconditionError);
}

TEST_CASE("hypothesis check evaluates the advertised inequality") {
  FixedPointProblem p = constant_problem(0.02);
  HypothesisReport h = check_hypothesis(p);
  CHECK(h.bal == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h.A == 1.0);
  double expected_lhs =
      p.A * std::exp(-12.0 * p.C * p.eta * std::sqrt(p.vol) / (2.0 * (2.0 + p.eta)));
  CHECK(h.lhs == doctest::Approx(expected_lhs).epsilon(1e-14));
  CHECK(h.rhs == doctest::Approx(std::pow(2.0 + p.eta, 3) * p.R / (2.0 * p.eta))
                     .epsilon(1e-14));
  CHECK(h.radius == doctest::Approx(u3_radius(p.C, p.eta, p.vol)).epsilon(1e-15));
  CHECK(h.bal_ok);
  CHECK(h.exp_ok == (h.lhs >= h.rhs));
  CHECK(h.ok() == (h.bal_ok && h.exp_ok));
}

TEST_CASE("first stage solves the curvature equation at prescribed volume") {
  FixedPointProblem p = constant_problem(0.05);
  VolumeSolve vs = phi1(*p.surface, p.f, p.eta, p.R);
  CHECK(std::abs(vs.achieved_mean - (0.5 - p.R)) <= 1e-8);
  CHECK(vs.t == doctest::Approx(2.0 * p.R * std::pow(0.5 - p.R, 2)).epsilon(1e-6));
}

TEST_CASE("second stage returns the mean-free correction potential") {
  FixedPointProblem p = constant_problem(0.05);
  VolumeSolve vs = phi1(*p.surface, p.f, p.eta, p.R);
  PoissonSolution sol = phi2(*p.surface, vs.solution.u, p.R);
  CHECK(std::abs(mean(sol.v)) <= 1e-12);
  // Constant input: the forcing 3/2 - 3R - 3 e^{2u} has zero mean by the
  // volume prescription and is constant, so v vanishes identically.
  CHECK(sup_abs(sol.v) <= 1e-8);
}

TEST_CASE("second stage enforces the compatibility gate") {
  FixedPointProblem p = constant_problem(0.05);
  // e^{2u} with mean far from 1/2 - R violates the solvability condition.
  ScalarField wrong_u = p.surface->field(-0.5 * std::log(2.0));
  CHECK_THROWS_AS((void)phi2(*p.surface, wrong_u, 0.3, 1e-9), PreconditionError);
}

TEST_CASE("third stage reweights and reports the balance cost") {
  FixedPointProblem p = constant_problem(0.05);
  ScalarField vhat = p.surface->zero_field();
  Phi3Result r3 = phi3(vhat, p.f, 0.25);
  CHECK(r3.bal_f == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r3.bal_fhat == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r3.exp_factor == 1.0);
  CHECK(field_max(r3.fhat) == doctest::Approx(1.0).epsilon(1e-14));

  // A genuine potential inside the radius must keep the guaranteed fraction.
  SectionNormSpec spec = build_section_norm(*p.surface, {{0, 1}});
  ScalarField v = p.surface->field(spec.psi.values() * 0.01);
  v = v + (-mean(v));
  double radius = 1.1 * sup_abs(v);
  Phi3Result r = phi3(v, spec.f_alpha, radius);
  CHECK(r.exp_factor ==
        doctest::Approx(std::exp(-4.0 * sup_abs(v))).epsilon(1e-14));
  CHECK(r.bal_fhat >= r.exp_factor * r.bal_f - 1e-15);
  CHECK_THROWS_AS((void)phi3(v, spec.f_alpha, 0.5 * sup_abs(v)), PreconditionError);
}

TEST_CASE("constant data collapses the iteration to its fixed point") {
  double eta = 0.5;
  double R = 0.02;
  FixedPointProblem p = constant_problem(R);
  FixedPointOptions opts;
  opts.constants = &constants();
  opts.volume_tol = 1e-10;
  opts.drift_tol = 1e-12;
  FixedPointCertificate cert = run_fixed_point(p, opts);
  CHECK(cert.converged);
  CHECK(cert.iterations <= 2);
  double u_star = 0.5 * std::log(0.5 - R);
  CHECK((cert.u.values().array() - u_star).abs().maxCoeff() <= 1e-8);
  CHECK(sup_abs(cert.v) <= 1e-8);
  double t_star = 2.0 * R * std::pow(0.5 - R, 2);
  CHECK(std::abs(cert.t - t_star) <= 1e-8);
  CHECK(cert.final_drift <= opts.drift_tol);
  CHECK(cert.residual_gauss <= 1e-8);
  CHECK(cert.residual_poisson <= 1e-8);
  CHECK(cert.u1_ok);
  CHECK(cert.u2_ok);
  CHECK(cert.u3_ok);
  CHECK(!cert.hypothesis_overridden);
  REQUIRE(!cert.history.empty());
  CHECK(cert.history.front().index == 0);
  CHECK(cert.fixed_point_gap <= 1e-10);

  // af = e^{-6u} t f = t / (1/2 - R)^3 = 2R / (1/2 - R) for constant data.
  AfReport af = af_certificate(*p.surface, cert.u, cert.v, cert.t, p.f, eta, R);
  CHECK(af.af_bound == doctest::Approx(2.0 * R / (0.5 - R)).epsilon(1e-7));
  CHECK(af.pass);
  CHECK(af.eta == eta);
  CHECK(af.margin == doctest::Approx(eta - af.af_bound).epsilon(1e-9));
  CHECK(af.R_used == R);
}

TEST_CASE("the anti-holomorphic energy crosses eta at the predicted volume") {
  // The constant-data runs above certify af(R) = 2R/(1/2 - R); that closed
  // form crosses eta exactly at R = eta / (2 (2 + eta)).  The crossing volume
  // itself sits beyond the balance gate (required balance (2+eta)^2/4 > 1),
  // so the statement is checked on the certified formula.
  for (double eta : {0.1, 0.5, 0.9}) {
    double R_cross = eta / (2.0 * (2.0 + eta));
    double af = 2.0 * R_cross / (0.5 - R_cross);
    CHECK(std::abs(af - eta) <= 1e-15);
    double R_low = 0.99 * R_cross;
    CHECK(2.0 * R_low / (0.5 - R_low) < eta);
    double R_high = 1.01 * R_cross;
    CHECK(2.0 * R_high / (0.5 - R_high) > eta);
  }
}

TEST_CASE("hypothesis failures stop the run unless overridden") {
  // R = 0.05: the exponential hypothesis fails (rhs ~ 0.78 > lhs ~ 0.53)
  // while the inner balance gate still holds (0.78 <= bal = 1).
  FixedPointProblem p = constant_problem(0.05);
  REQUIRE(!check_hypothesis(p).ok());
  FixedPointOptions opts;
  opts.constants = &constants();
  CHECK_THROWS_AS((void)run_fixed_point(p, opts), PreconditionError);
  opts.override_hypothesis = true;
  FixedPointCertificate cert = run_fixed_point(p, opts);
  CHECK(cert.hypothesis_overridden);
  CHECK(cert.converged);
}

TEST_CASE("section data drives the full loop to a certified fixed point") {
  const Surface& s = octagon4();
  SectionNormSpec spec = build_section_norm(s, {{0, 1}});
  FixedPointProblem p;
  p.surface = &s;
  p.f = spec.f_alpha;
  p.eta = 0.5;
  p.R = 0.02;
  p.A = spec.bal;
  p.C = constants().poisson_constant();
  p.vol = s.volume();
  REQUIRE(check_hypothesis(p).ok());
  FixedPointOptions opts;
  opts.constants = &constants();
  FixedPointCertificate cert = run_fixed_point(p, opts);
  CHECK(cert.converged);
  CHECK(!cert.hypothesis_overridden);
  CHECK(cert.u1_ok);
  CHECK(cert.u2_ok);
  CHECK(cert.u3_ok);
  CHECK(cert.residual_gauss <= 1e-6);
  CHECK(cert.residual_poisson <= 1e-6);
  CHECK(sup_abs(cert.v) <= cert.radius);
  AfReport af = af_certificate(s, cert.u, cert.v, cert.t, spec.f_alpha, p.eta,
                               p.R);
  CHECK(af.pass);
  CHECK(af.af_bound <= p.eta);
  // Drift decreases along the recorded history.
  for (size_t i = 1; i < cert.history.size(); ++i)
    CHECK(cert.history[i].drift <= cert.history[i - 1].drift * 1.01 + 1e-12);
}

TEST_CASE("infeasible volume targets surface as iteration preconditions") {
  FixedPointProblem p = constant_problem(0.4);  // beyond any admissible t
  FixedPointOptions opts;
  opts.constants = &constants();
  opts.override_hypothesis = true;
  try {
    (void)run_fixed_point(p, opts);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}
