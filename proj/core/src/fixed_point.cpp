#include "curvlab/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "curvlab/errors.hpp"

namespace curvlab {

double u3_radius(double C, double eta, double vol) {
  if (!(C > 0.0) || !(eta > 0.0 && eta < 1.0) || !(vol > 0.0)) {
    throw PreconditionError("u3_radius: need C > 0, eta in (0,1), vol > 0");
  }
  return 3.0 * C * eta * std::sqrt(vol) / (2.0 * (2.0 + eta));
}

HypothesisReport check_hypothesis(const FixedPointProblem& problem) {
  if (problem.surface == nullptr) throw PreconditionError("check_hypothesis: missing surface");
  if (!(problem.eta > 0.0 && problem.eta < 1.0)) {
    throw PreconditionError("check_hypothesis: eta must lie in (0,1)");
  }
  if (problem.A <= 0.0 || problem.C <= 0.0 || problem.vol <= 0.0 || problem.R <= 0.0) {
    throw PreconditionError("check_hypothesis: constants must be positive");
  }
  HypothesisReport report;
  report.A = problem.A;
  report.bal = balance_ratio(problem.f);
  report.bal_ok = report.bal >= problem.A * (1.0 - 1e-12);
  report.radius = u3_radius(problem.C, problem.eta, problem.vol);
  report.lhs = problem.A * std::exp(-4.0 * report.radius);
  report.rhs = std::pow(2.0 + problem.eta, 3) * problem.R / (2.0 * problem.eta);
  report.exp_ok = report.lhs >= report.rhs * (1.0 - 1e-12);
  return report;
}

VolumeSolve phi1(const Surface& surface, const ScalarField& fhat, double eta, double R,
                 double tol) {
  return solve_gauss_with_volume(surface, fhat, eta, R, tol);
}

PoissonSolution phi2(const Surface& surface, const ScalarField& uhat, double R,
                     double mean_tol, double tol, const GeometryConstants* constants) {
  const ScalarField rhs =
      exp_field(uhat * 2.0) * (-3.0) + (1.5 - 3.0 * R);
  const double m = mean(rhs);
  if (std::abs(m) > mean_tol) {
    std::ostringstream msg;
    msg << "phi2: right-hand side mean " << m << " exceeds " << mean_tol
        << " (volume prescription violated upstream)";
    throw PreconditionError(msg.str());
  }
  PoissonOptions opts;
  opts.tol = tol;
  opts.project_mean = true;  // absorbs the tolerance-level residual mean
  opts.constants = constants;
  return solve_poisson_zero_mean(surface, rhs, opts);
}

Phi3Result phi3(const ScalarField& vhat, const ScalarField& f, double radius, double tol) {
  const double sup_v = sup_abs(vhat);
  if (std::abs(mean(vhat)) > tol * (1.0 + sup_v)) {
    throw PreconditionError("phi3: vhat is not zero-mean");
  }
  if (sup_v > radius * (1.0 + 1e-9) + 1e-15) {
    std::ostringstream msg;
    msg << "phi3: sup|vhat| = " << sup_v << " exceeds the admissible radius " << radius;
    throw PreconditionError(msg.str());
  }
  Phi3Result out;
  out.fhat = exp_field(vhat * 2.0) * f;
  out.bal_f = balance_ratio(f);
  out.bal_fhat = balance_ratio(out.fhat);
  out.exp_factor = std::exp(-4.0 * sup_v);
  if (out.bal_fhat < out.exp_factor * out.bal_f * (1.0 - 1e-12)) {
    throw PreconditionError("phi3: balance deterioration bound violated");
  }
  return out;
}

FixedPointCertificate run_fixed_point(const FixedPointProblem& problem,
                                      const FixedPointOptions& opts) {
  if (opts.max_iter < 1) throw PreconditionError("run_fixed_point: max_iter >= 1 required");
  const HypothesisReport hyp = check_hypothesis(problem);
  if (!hyp.ok() && !opts.override_hypothesis) {
    std::ostringstream msg;
    msg << "run_fixed_point: hypothesis fails (bal " << hyp.bal << " vs A " << hyp.A
        << "; lhs " << hyp.lhs << " vs rhs " << hyp.rhs
        << "); pass override_hypothesis for an exploratory run";
    throw PreconditionError(msg.str());
  }

  const Surface& surface = *problem.surface;
  const double radius = hyp.radius;
  const double required_bal = std::pow(2.0 + problem.eta, 3) * problem.R / (2.0 * problem.eta);
  const double lo_e2u = 1.0 / (2.0 + problem.eta);

  FixedPointCertificate cert;
  cert.hypothesis_ok = hyp.ok();
  cert.hypothesis_overridden = !hyp.ok() && opts.override_hypothesis;
  cert.radius = radius;

  ScalarField fhat = problem.f;
  double theta = opts.theta;
  double prev_drift = std::numeric_limits<double>::infinity();

  VolumeSolve vs;
  PoissonSolution ps;
  for (int k = 0; k < opts.max_iter; ++k) {
    IterationRecord rec;
    rec.index = k;
    rec.theta = theta;
    try {
      rec.bal = balance_ratio(fhat);
      rec.u1_ok = field_min(fhat) >= 0.0 && rec.bal >= required_bal * (1.0 - 1e-9);

      vs = phi1(surface, fhat, problem.eta, problem.R, opts.volume_tol);
      rec.t = vs.t;
      const ScalarField e2u = exp_field(vs.solution.u * 2.0);
      rec.u2_ok = std::abs(mean(e2u) - (0.5 - problem.R)) <= 10.0 * opts.volume_tol &&
                  field_min(e2u) >= lo_e2u - 1e-9 && field_max(e2u) <= 0.5 + 1e-9;

      ps = phi2(surface, vs.solution.u, problem.R, opts.mean_tol, opts.pde_tol,
                opts.constants);
      rec.u3_ok = std::abs(mean(ps.v)) <= 1e-10 * (1.0 + sup_abs(ps.v)) &&
                  sup_abs(ps.v) <= radius * (1.0 + 1e-9) + 1e-15;

      const Phi3Result p3 = phi3(ps.v, problem.f, radius);
      ScalarField fnext = p3.fhat * theta + fhat * (1.0 - theta);
      rec.drift = sup_abs(fnext - fhat);
      fhat = std::move(fnext);
    } catch (const PreconditionError& err) {
      std::ostringstream msg;
      msg << "run_fixed_point: iteration " << k << ": " << err.what();
      throw PreconditionError(msg.str());
    }

    cert.history.push_back(rec);
    cert.iterations = k + 1;
    cert.final_drift = rec.drift;
    if (rec.drift <= opts.drift_tol) {
      cert.converged = true;
      break;
    }
    if (rec.drift > prev_drift && theta > 1.0 / 64.0) theta *= 0.5;
    prev_drift = rec.drift;
  }
  cert.theta_final = theta;

  cert.u = vs.solution.u;
  cert.v = ps.v;
  cert.fhat = fhat;
  cert.t = vs.t;

  // Certificate quantities, recomputed through the shared Laplacian rather
  // than any solver-internal operator.
  const ScalarField e2u = exp_field(cert.u * 2.0);
  const ScalarField e2v = exp_field(cert.v * 2.0);
  const ScalarField data = e2v * problem.f;  // e^{2v} f
  cert.fixed_point_gap = sup_abs(cert.fhat - data);

  const ScalarField gauss_rhs =
      e2u * 2.0 - 1.0 + exp_field(cert.u * -4.0) * data * cert.t;
  cert.residual_gauss = sup_abs(laplacian(cert.u) - gauss_rhs);
  const ScalarField poisson_rhs = e2u * (-3.0) + (1.5 - 3.0 * problem.R);
  cert.residual_poisson = sup_abs(laplacian(cert.v) - poisson_rhs);

  cert.af_bound = field_max(exp_field(cert.u * -6.0) * e2v * problem.f * cert.t);
  if (!cert.history.empty()) {
    const IterationRecord& last = cert.history.back();
    cert.u1_ok = last.u1_ok;
    cert.u2_ok = last.u2_ok;
    cert.u3_ok = last.u3_ok;
  }
  return cert;
}

AfReport af_certificate(const Surface& surface, const ScalarField& u, const ScalarField& v,
                        double t, const ScalarField& f, double eta,
                        std::optional<double> R, double tol) {
  if (u.size() != surface.n_vertices() || v.size() != u.size() || f.size() != u.size()) {
    throw PreconditionError("af_certificate: fields do not match the surface");
  }
  AfReport report;
  report.eta = eta;

  const ScalarField e2u = exp_field(u * 2.0);
  const ScalarField e2v = exp_field(v * 2.0);
  report.R_used = R.has_value() ? *R : 0.5 - mean(e2u);
  report.r_inferred = !R.has_value();

  report.af_bound = field_max(exp_field(u * -6.0) * e2v * f * t);
  report.margin = eta - report.af_bound;

  const ScalarField gauss_rhs = e2u * 2.0 - 1.0 + exp_field(u * -4.0) * e2v * f * t;
  report.residual_u = sup_abs(laplacian(u) - gauss_rhs);
  const ScalarField poisson_rhs = e2u * (-3.0) + (1.5 - 3.0 * report.R_used);
  report.residual_v = sup_abs(laplacian(v) - poisson_rhs);

  report.pass = report.af_bound <= eta && eta < 1.0 && report.residual_u <= tol &&
                report.residual_v <= tol;
  return report;
}

}  // namespace curvlab
