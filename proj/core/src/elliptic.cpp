#include "curvlab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

// Pointwise right-hand side 2 e^{2u} - 1 + e^{-4u} w, w = t f.
Eigen::VectorXd gauss_rhs(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  return 2.0 * (2.0 * u).array().exp() - 1.0 + (-4.0 * u).array().exp() * w.array();
}

// Sup-norm of Delta u - rhs(u), evaluated from scratch.
double gauss_residual(const Surface& surface, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& w) {
  const Eigen::VectorXd pde =
      (surface.stiffness() * u).array() / surface.mu().array() + gauss_rhs(u, w).array();
  return pde.cwiseAbs().maxCoeff();
}

void check_admissible(const Surface& surface, const ScalarField& f, double eta, double t) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw PreconditionError("solve_gauss: eta must lie in (0,1)");
  }
  if (t < 0.0) throw PreconditionError("solve_gauss: ray parameter t must be >= 0");
  const double cap = eta / std::pow(2.0 + eta, 3);
  const double slack = 1e-12 * (1.0 + cap);
  int worst = -1;
  double worst_excess = 0.0;
  for (int i = 0; i < surface.n_vertices(); ++i) {
    const double w = t * f[i];
    const double excess = std::max(-(t * f[i]) - slack, w - cap - slack);
    if (excess > worst_excess) {
      worst_excess = excess;
      worst = i;
    }
  }
  if (worst >= 0) {
    std::ostringstream msg;
    msg << "solve_gauss: data out of admissible range [0, eta/(2+eta)^3] at vertex " << worst
        << " (t*f = " << t * f[worst] << ", cap = " << cap << ")";
    throw PreconditionError(msg.str());
  }
}

}  // namespace

double GaussSolution::bracket_lo() const { return -0.5 * std::log(2.0 + eta); }
double GaussSolution::bracket_hi() const { return -0.5 * std::log(2.0); }

double gauss_constant_root(double w, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw PreconditionError("gauss_constant_root: eta must lie in (0,1)");
  }
  const double cap = eta / std::pow(2.0 + eta, 3);
  if (w < -1e-15 || w > cap * (1.0 + 1e-12)) {
    throw PreconditionError("gauss_constant_root: data out of admissible range");
  }
  const auto phi = [w](double s) {
    return 2.0 * std::exp(2.0 * s) - 1.0 + w * std::exp(-4.0 * s);
  };
  double lo = -0.5 * std::log(2.0 + eta);
  double hi = -0.5 * std::log(2.0);
  // phi(lo) <= 0 <= phi(hi) by the admissibility cap; phi strictly increasing.
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GaussSolution solve_gauss(const Surface& surface, const ScalarField& f, double eta,
                          const GaussOptions& opts) {
  check_admissible(surface, f, eta, opts.t);
  const int n = surface.n_vertices();
  const Eigen::VectorXd w = opts.t * f.values();
  const Eigen::SparseMatrix<double>& s = surface.stiffness();
  const Eigen::VectorXd& mu = surface.mu();

  const double lo = -0.5 * std::log(2.0 + eta);
  const double hi = -0.5 * std::log(2.0);

  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, hi);
  if (opts.initial.has_value()) {
    if (opts.initial->size() != n) {
      throw PreconditionError("solve_gauss: warm start has wrong size");
    }
    u = opts.initial->cwiseMax(lo).cwiseMin(hi);
  }

  GaussSolution out;
  out.t = opts.t;
  out.eta = eta;
  out.f = f;

  // Newton phase.  The linearization coefficient 4e^{2u} - 4e^{-4u}w equals
  // 4e^{2u}(1 - e^{-6u}w) >= 4e^{2u}(1-eta) > 0 on the bracket, so
  // S + M diag(coeff) is SPD and the step is well defined.
  double res = gauss_residual(surface, u, w);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  bool newton_ok = true;
  while (res > opts.tol && out.newton_iterations < opts.max_iter) {
    const Eigen::VectorXd coeff =
        4.0 * (2.0 * u).array().exp() - 4.0 * (-4.0 * u).array().exp() * w.array();
    Eigen::SparseMatrix<double> j = s;
    for (int i = 0; i < n; ++i) j.coeffRef(i, i) += mu[i] * coeff[i];
    llt.compute(j);
    if (llt.info() != Eigen::Success) {
      newton_ok = false;
      break;
    }
    const Eigen::VectorXd grad = s * u + mu.asDiagonal() * gauss_rhs(u, w);
    const Eigen::VectorXd step = llt.solve(-grad);

    // Backtracking on the sup-norm residual, iterates clamped to the bracket.
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXd trial = (u + alpha * step).cwiseMax(lo).cwiseMin(hi);
      const double trial_res = gauss_residual(surface, trial, w);
      if (trial_res < res) {
        u = std::move(trial);
        res = trial_res;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++out.newton_iterations;
    if (!accepted) {
      newton_ok = false;
      break;
    }
  }

  // Monotone fallback: (Delta - lambda) u_{k+1} = rhs(u_k) - lambda u_k with
  // lambda dominating the linearization coefficient on the bracket.
  if (res > opts.tol) {
    out.used_fallback = true;
    const double lambda = 4.0 * (1.0 + 1e-2);
    Eigen::SparseMatrix<double> shifted = s;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += lambda * mu[i];
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("solve_gauss: shifted operator factorization failed");
    }
    int cap = std::max(opts.max_iter, 400);
    while (res > opts.tol && out.fallback_iterations < cap) {
      const Eigen::VectorXd b =
          mu.asDiagonal() * (lambda * u - gauss_rhs(u, w));
      u = llt.solve(b).cwiseMax(lo).cwiseMin(hi);
      res = gauss_residual(surface, u, w);
      ++out.fallback_iterations;
    }
    if (res > opts.tol) {
      std::ostringstream msg;
      msg << "solve_gauss: residual " << res << " above tolerance " << opts.tol << " after "
          << out.newton_iterations << " Newton + " << out.fallback_iterations
          << " fallback iterations (newton_ok=" << newton_ok << ")";
      throw ConvergenceError(msg.str());
    }
  }

  out.u = surface.field(u);
  out.residual_sup = gauss_residual(surface, u, w);
  out.bracket_ok = (u.minCoeff() >= lo - 1e-12) && (u.maxCoeff() <= hi + 1e-12);
  const double lap_sup = sup_abs(laplacian(out.u));
  out.laplacian_bound_ok = lap_sup <= eta / (2.0 + eta) + out.residual_sup + 1e-12;
  return out;
}

StabilityProbeReport gauss_stability_probe(const Surface& surface, const ScalarField& f,
                                           double eta, double eps, int draws, unsigned seed) {
  if (eps < 0.0) throw PreconditionError("gauss_stability_probe: eps must be >= 0");
  const double cap = eta / std::pow(2.0 + eta, 3);
  const GaussSolution base = solve_gauss(surface, f, eta);

  StabilityProbeReport report;
  report.eps = eps;
  report.draws = draws;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXd g(surface.n_vertices());
    double actual_eps = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      // Clamping back into the admissible box keeps the perturbed data legal.
      g[i] = std::clamp(f[i] + eps * unif(rng), 0.0, cap);
      actual_eps = std::max(actual_eps, std::abs(g[i] - f[i]));
    }
    GaussOptions warm;
    warm.initial = base.u.values();
    const GaussSolution pert = solve_gauss(surface, surface.field(g), eta, warm);
    const double diff = (pert.u.values() - base.u.values()).cwiseAbs().maxCoeff();
    report.diffs.push_back(diff);
    report.max_diff = std::max(report.max_diff, diff);
    if (actual_eps > 0.0) {
      report.max_ratio = std::max(report.max_ratio, diff / actual_eps);
    }
  }
  return report;
}

PoissonSolution solve_poisson_zero_mean(const Surface& surface, const ScalarField& rhs,
                                        const PoissonOptions& opts) {
  const int n = surface.n_vertices();
  const Eigen::VectorXd& mu = surface.mu();
  const double vol = surface.volume();
  const Eigen::SparseMatrix<double>& s = surface.stiffness();

  Eigen::VectorXd r = rhs.values();
  const double rhs_mean = mu.dot(r) / vol;
  const double rhs_l2 = std::sqrt((r.array().square() * mu.array()).sum());
  if (std::abs(rhs_mean) > 1e-12 * (rhs_l2 + 1e-300)) {
    if (!opts.project_mean) {
      std::ostringstream msg;
      msg << "solve_poisson_zero_mean: solvability condition violated (mean(rhs) = "
          << rhs_mean << "); pass project_mean to subtract it";
      throw PreconditionError(msg.str());
    }
    r.array() -= rhs_mean;
  }

  auto project = [&](Eigen::VectorXd& x) { x.array() -= mu.dot(x) / vol; };
  // Residuals b - Sx live in range(S) = {sum = 0} (stiffness rows sum to
  // zero), so drift control there must use the plain mean, not the M-mean.
  auto project_residual = [&](Eigen::VectorXd& x) { x.array() -= x.sum() / n; };

  // Preconditioner: Cholesky of S + M, an SPD spectral-equivalent of S on the
  // zero-mean subspace (condition about 1 + 1/Lambda).
  Eigen::SparseMatrix<double> precond_mat = s;
  for (int i = 0; i < n; ++i) precond_mat.coeffRef(i, i) += mu[i];
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(precond_mat);
  if (llt.info() != Eigen::Success) {
    throw ConvergenceError("solve_poisson_zero_mean: preconditioner factorization failed");
  }

  Eigen::VectorXd x = opts.initial.has_value() ? *opts.initial : Eigen::VectorXd::Zero(n);
  if (x.size() != n) throw PreconditionError("solve_poisson_zero_mean: bad warm start size");
  project(x);

  const Eigen::VectorXd b = -(mu.array() * r.array()).matrix();
  Eigen::VectorXd res = b - s * x;
  project_residual(res);
  Eigen::VectorXd z = llt.solve(res);
  project(z);
  Eigen::VectorXd p = z;
  double rz = res.dot(z);

  int it = 0;
  double pde_res = (res.array() / mu.array()).abs().maxCoeff();
  while (pde_res > opts.tol && it < opts.max_iter) {
    const Eigen::VectorXd sp = s * p;
    const double psp = p.dot(sp);
    if (psp <= 0.0) {
      throw ConvergenceError("solve_poisson_zero_mean: operator lost positivity");
    }
    const double alpha = rz / psp;
    x += alpha * p;
    res -= alpha * sp;
    project_residual(res);
    z = llt.solve(res);
    project(z);
    const double rz_next = res.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    pde_res = (res.array() / mu.array()).abs().maxCoeff();
    ++it;
  }
  if (pde_res > opts.tol) {
    std::ostringstream msg;
    msg << "solve_poisson_zero_mean: residual " << pde_res << " above tolerance " << opts.tol
        << " after " << it << " iterations";
    throw ConvergenceError(msg.str());
  }
  project(x);

  PoissonSolution out;
  out.v = surface.field(x);
  out.rhs = surface.field(r);
  out.iterations = it;
  out.residual_sup = pde_res;
  out.norms.sup_v = x.cwiseAbs().maxCoeff();
  out.norms.l2_v = std::sqrt((x.array().square() * mu.array()).sum());
  out.norms.grad_v = std::sqrt(std::max(x.dot(s * x), 0.0));
  out.norms.l2_rhs = std::sqrt((r.array().square() * mu.array()).sum());
  if (opts.constants != nullptr) {
    out.bound_report.present = true;
    out.bound_report.c_value = opts.constants->poisson_constant();
    out.bound_report.bound = out.bound_report.c_value * out.norms.l2_rhs;
    out.bound_report.sup_v = out.norms.sup_v;
    out.bound_report.ok = out.norms.sup_v <= out.bound_report.bound * (1.0 + 1e-12);
  }
  return out;
}

NormChainReport poisson_norm_chain(const Surface& surface, const PoissonSolution& sol,
                                   double lambda) {
  if (lambda <= 0.0) throw PreconditionError("poisson_norm_chain: lambda must be positive");
  auto link = [](double lhs, double rhs) {
    ChainLink l;
    l.lhs = lhs;
    l.rhs = rhs;
    l.slack = (rhs == 0.0) ? (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                           : lhs / rhs;
    l.holds = lhs <= rhs * (1.0 + 1e-8) + 1e-300;
    return l;
  };

  const double l2_rhs = sol.norms.l2_rhs;
  const ScalarField lap = laplacian(sol.v);
  const double l2_lap = l2_norm(lap);
  const double w22 = std::sqrt(sol.norms.l2_v * sol.norms.l2_v +
                               2.0 * sol.norms.grad_v * sol.norms.grad_v + l2_lap * l2_lap);

  NormChainReport report;
  report.lambda = lambda;
  report.poincare = link(sol.norms.l2_v, l2_rhs / lambda);
  report.gradient = link(sol.norms.grad_v * sol.norms.grad_v, l2_rhs * l2_rhs / (lambda * lambda));
  report.w22 = link(w22, std::sqrt(1.0 + 2.0 / (lambda * lambda) +
                                   1.0 / (lambda * lambda * lambda)) * l2_rhs);
  (void)surface;
  return report;
}

}  // namespace curvlab
