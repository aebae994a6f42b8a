#include "curvlab/h4.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

// Pointwise right-hand side e^{2u} - 1 + e^{-4u} w, w = t f.
Eigen::VectorXd h4_rhs(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  return (2.0 * u).array().exp() - 1.0 + (-4.0 * u).array().exp() * w.array();
}

double h4_residual(const Surface& surface, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& w) {
  const Eigen::VectorXd pde =
      (surface.stiffness() * u).array() / surface.mu().array() + h4_rhs(u, w).array();
  return pde.cwiseAbs().maxCoeff();
}

// Direct Newton on Delta u = e^{2u} - 1 + e^{-4u} w inside [ln(4/(4+eta))/2, 0].
// The linearization coefficient 2e^{2u} - 4e^{-4u}w = 2e^{2u}(1 - 2e^{-6u}w)
// stays positive on the bracket because e^{-6u}w <= eta/4 < 1/2 there.
Eigen::VectorXd direct_newton_h4(const Surface& surface, const Eigen::VectorXd& w, double eta,
                                 Eigen::VectorXd u, double tol, int max_iter) {
  const int n = surface.n_vertices();
  const Eigen::SparseMatrix<double>& s = surface.stiffness();
  const Eigen::VectorXd& mu = surface.mu();
  const double lo = 0.5 * std::log(4.0 / (4.0 + eta));
  const double hi = 0.0;
  u = u.cwiseMax(lo).cwiseMin(hi);

  double res = h4_residual(surface, u, w);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  int iter = 0;
  while (res > tol && iter < max_iter) {
    const Eigen::VectorXd coeff =
        2.0 * (2.0 * u).array().exp() - 4.0 * (-4.0 * u).array().exp() * w.array();
    Eigen::SparseMatrix<double> j = s;
    for (int i = 0; i < n; ++i) j.coeffRef(i, i) += mu[i] * coeff[i];
    llt.compute(j);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("solve_gauss_h4: direct Newton factorization failed");
    }
    const Eigen::VectorXd grad = s * u + mu.asDiagonal() * h4_rhs(u, w);
    const Eigen::VectorXd step = llt.solve(-grad);

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXd trial = (u + alpha * step).cwiseMax(lo).cwiseMin(hi);
      const double trial_res = h4_residual(surface, trial, w);
      if (trial_res < res) {
        u = std::move(trial);
        res = trial_res;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++iter;
    if (!accepted) break;
  }
  if (res > tol) {
    std::ostringstream msg;
    msg << "solve_gauss_h4: direct Newton residual " << res << " above tolerance " << tol
        << " after " << iter << " iterations";
    throw ConvergenceError(msg.str());
  }
  return u;
}

double stated_balance(double eta, double R) {
  return std::pow(8.0 + eta, 3) * R / (16.0 * eta);
}

double reduced_balance(double eta, double R) {
  return std::pow(4.0 + eta, 3) * R / (16.0 * eta);
}

}  // namespace

double H4GaussSolution::bracket_lo() const { return 0.5 * std::log(4.0 / (4.0 + eta)); }
double H4GaussSolution::bracket_hi() const { return 0.0; }

double max_admissible_t_h4(const ScalarField& f, double eta) {
  if (!(eta > 0.0 && eta < 0.5)) {
    throw PreconditionError("max_admissible_t_h4: eta must lie in (0,1/2)");
  }
  const double sup = field_max(f);
  if (field_min(f) < 0.0) {
    throw PreconditionError("max_admissible_t_h4: field must be nonnegative");
  }
  if (sup == 0.0) return std::numeric_limits<double>::infinity();
  return 16.0 * eta / (std::pow(4.0 + eta, 3) * sup);
}

H4GaussSolution solve_gauss_h4(const Surface& surface, const ScalarField& f, double eta,
                               double R, const H4GaussOptions& opts) {
  if (!(eta > 0.0 && eta < 0.5)) {
    throw PreconditionError("solve_gauss_h4: eta must lie in (0,1/2)");
  }
  if (!(R > 0.0 && R < 1.0)) {
    throw PreconditionError("solve_gauss_h4: volume defect R must lie in (0,1)");
  }
  const double bal = balance_ratio(f);
  const double required =
      opts.require_stated_balance ? stated_balance(eta, R) : reduced_balance(eta, R);
  if (bal < required * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "solve_gauss_h4: balance hypothesis fails (bal(f) = " << bal << ", required >= "
        << required << ")";
    throw PreconditionError(msg.str());
  }

  // u = u~ + ln(2)/2 turns Delta u = e^{2u} - 1 + e^{-4u} t f into the
  // standard equation for u~ with data f/4, parameter eta/2, and the volume
  // target mean(e^{2u}) = 1 - R into mean(e^{2u~}) = 1/2 - R/2.
  const VolumeSolve vs =
      solve_gauss_with_volume(surface, f * 0.25, 0.5 * eta, 0.5 * R, opts.volume_tol);

  H4GaussSolution out;
  out.f = f;
  out.eta = eta;
  out.target_R = R;
  out.t = vs.t;
  out.u = vs.solution.u + 0.5 * std::log(2.0);
  out.balance = bal;
  out.required_balance = required;
  out.evaluations = vs.evaluations;

  out.achieved_mean = mean(exp_field(out.u * 2.0));
  const Eigen::VectorXd w = out.t * f.values();
  out.residual_sup = h4_residual(surface, out.u.values(), w);
  out.af_sup = field_max(exp_field(out.u * -6.0) * f * out.t);
  out.bracket_ok = field_min(out.u) >= out.bracket_lo() - 1e-12 &&
                   field_max(out.u) <= out.bracket_hi() + 1e-12;

  if (opts.native_check) {
    const Eigen::VectorXd u_direct = direct_newton_h4(surface, w, eta, out.u.values(),
                                                      opts.newton_tol, opts.newton_max_iter);
    out.two_path_gap = (out.u.values() - u_direct).cwiseAbs().maxCoeff();
    out.native_checked = true;
  }
  return out;
}

H4HypothesisReport check_hypothesis_h4(const H4Problem& problem) {
  if (problem.surface == nullptr) {
    throw PreconditionError("check_hypothesis_h4: missing surface");
  }
  if (!(problem.eta > 0.0 && problem.eta < 0.5)) {
    throw PreconditionError("check_hypothesis_h4: eta must lie in (0,1/2)");
  }
  if (problem.A <= 0.0 || problem.C <= 0.0 || problem.vol <= 0.0 || problem.R <= 0.0) {
    throw PreconditionError("check_hypothesis_h4: constants must be positive");
  }
  H4HypothesisReport report;
  report.A = problem.A;
  report.bal = balance_ratio(problem.f);
  report.bal_ok = report.bal >= problem.A * (1.0 - 1e-12);
  report.w_radius =
      problem.C * problem.eta * std::sqrt(problem.vol) / (4.0 + problem.eta);
  report.lhs = problem.A * std::exp(-4.0 * report.w_radius);
  report.rhs = stated_balance(problem.eta, problem.R);
  report.exp_ok = report.lhs >= report.rhs * (1.0 - 1e-12);
  return report;
}

H4Certificate run_fixed_point_h4(const H4Problem& problem, const H4Options& opts) {
  if (opts.max_iter < 1) throw PreconditionError("run_fixed_point_h4: max_iter >= 1 required");
  const H4HypothesisReport hyp = check_hypothesis_h4(problem);
  if (!hyp.ok() && !opts.override_hypothesis) {
    std::ostringstream msg;
    msg << "run_fixed_point_h4: hypothesis fails (bal " << hyp.bal << " vs A " << hyp.A
        << "; lhs " << hyp.lhs << " vs rhs " << hyp.rhs
        << "); pass override_hypothesis for an exploratory run";
    throw PreconditionError(msg.str());
  }

  const Surface& surface = *problem.surface;
  const double w_radius = hyp.w_radius;

  H4Certificate cert;
  cert.hypothesis_ok = hyp.ok();
  cert.hypothesis_overridden = !hyp.ok() && opts.override_hypothesis;
  cert.w_radius = w_radius;

  H4GaussOptions go;
  go.volume_tol = opts.volume_tol;
  go.newton_tol = opts.pde_tol;
  go.native_check = false;  // cross-check once at the end, not per iteration
  go.require_stated_balance = !opts.override_hypothesis;

  ScalarField fhat = problem.f;
  double theta = opts.theta;
  double prev_drift = std::numeric_limits<double>::infinity();

  H4GaussSolution hg;
  PoissonSolution ps;
  for (int k = 0; k < opts.max_iter; ++k) {
    H4IterationRecord rec;
    rec.index = k;
    rec.theta = theta;
    try {
      hg = solve_gauss_h4(surface, fhat, problem.eta, problem.R, go);
      rec.t = hg.t;

      const ScalarField rhs_w = exp_field(hg.u * 2.0) + (problem.R - 1.0);
      const double m = mean(rhs_w);
      if (std::abs(m) > opts.mean_tol) {
        std::ostringstream msg;
        msg << "w-step right-hand side mean " << m << " exceeds " << opts.mean_tol
            << " (volume prescription violated upstream)";
        throw PreconditionError(msg.str());
      }
      PoissonOptions po;
      po.tol = opts.pde_tol;
      po.project_mean = true;  // absorbs the tolerance-level residual mean
      po.constants = opts.constants;
      ps = solve_poisson_zero_mean(surface, rhs_w, po);

      rec.w_sup = sup_abs(ps.v);
      rec.w_ok = rec.w_sup <= w_radius * (1.0 + 1e-9) + 1e-15;
      if (!rec.w_ok && !opts.override_hypothesis) {
        std::ostringstream msg;
        msg << "sup|w| = " << rec.w_sup << " exceeds the admissible radius " << w_radius;
        throw PreconditionError(msg.str());
      }

      ScalarField fnext =
          (exp_field(ps.v * 2.0) * problem.f) * theta + fhat * (1.0 - theta);
      rec.drift = sup_abs(fnext - fhat);
      fhat = std::move(fnext);
    } catch (const PreconditionError& err) {
      std::ostringstream msg;
      msg << "run_fixed_point_h4: iteration " << k << ": " << err.what();
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

  cert.u = hg.u;
  cert.w = ps.v;
  cert.v = ps.v - hg.u;
  cert.fhat = fhat;
  cert.t = hg.t;

  // Certificate quantities, recomputed through the shared Laplacian in both
  // variable pairs.
  const ScalarField e2u = exp_field(cert.u * 2.0);
  const ScalarField e2w = exp_field(cert.w * 2.0);
  const ScalarField e2v = exp_field(cert.v * 2.0);
  const ScalarField data_w = exp_field(cert.u * -4.0) * e2w * problem.f * cert.t;
  const ScalarField data_v = exp_field(cert.u * -2.0) * e2v * problem.f * cert.t;
  cert.fixed_point_gap = sup_abs(cert.fhat - e2w * problem.f);

  cert.residual_gauss_w = sup_abs(laplacian(cert.u) - (e2u - 1.0 + data_w));
  cert.residual_poisson_w = sup_abs(laplacian(cert.w) - (e2u + (problem.R - 1.0)));
  cert.residual_gauss_v = sup_abs(laplacian(cert.u) - (e2u - 1.0 + data_v));
  cert.residual_poisson_v = sup_abs(laplacian(cert.v) - (data_v * -1.0 + problem.R));

  cert.af_bound_w = field_max(exp_field(cert.u * -6.0) * e2w * problem.f * cert.t);
  cert.af_bound_v = field_max(exp_field(cert.u * -4.0) * e2v * problem.f * cert.t);
  cert.af_identity_gap = std::abs(cert.af_bound_w - cert.af_bound_v) /
                         std::max(cert.af_bound_w, 1e-300);

  if (!cert.history.empty()) {
    const H4IterationRecord& last = cert.history.back();
    cert.w_sup = last.w_sup;
    cert.w_ok = last.w_ok;
  }

  if (opts.native_check) {
    const Eigen::VectorXd w_data = hg.t * hg.f.values();
    const Eigen::VectorXd u_direct = direct_newton_h4(
        surface, w_data, problem.eta, cert.u.values(), opts.pde_tol, 100);
    cert.two_path_gap = (cert.u.values() - u_direct).cwiseAbs().maxCoeff();
    cert.native_checked = true;
  }
  return cert;
}

}  // namespace curvlab
