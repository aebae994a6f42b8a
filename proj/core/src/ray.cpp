#include "curvlab/ray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "curvlab/errors.hpp"

namespace curvlab {

double max_admissible_t(const ScalarField& f, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw PreconditionError("max_admissible_t: eta must lie in (0,1)");
  }
  if (field_min(f) < 0.0) {
    throw PreconditionError("max_admissible_t: f must be nonnegative");
  }
  const double sup = field_max(f);
  if (sup == 0.0) return std::numeric_limits<double>::infinity();
  return eta / (std::pow(2.0 + eta, 3) * sup);
}

std::vector<double> chebyshev_grid(double t_end, int points) {
  if (points < 2) throw PreconditionError("chebyshev_grid: points >= 2 required");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw PreconditionError("chebyshev_grid: t_end must be positive and finite");
  }
  std::vector<double> grid(points);
  for (int j = 0; j < points; ++j) {
    grid[j] = t_end * 0.5 * (1.0 - std::cos(M_PI * j / (points - 1)));
  }
  grid[0] = 0.0;
  grid[points - 1] = t_end;
  return grid;
}

RayProfile solve_ray(const Surface& surface, const ScalarField& f, double eta,
                     const std::vector<double>& t_grid, double tol) {
  if (t_grid.empty()) throw PreconditionError("solve_ray: empty t grid");
  if (t_grid.front() != 0.0) throw PreconditionError("solve_ray: grid must start at t = 0");
  for (size_t j = 1; j < t_grid.size(); ++j) {
    if (t_grid[j] <= t_grid[j - 1]) {
      throw PreconditionError("solve_ray: grid must be strictly increasing");
    }
  }
  const double cap = max_admissible_t(f, eta);
  if (t_grid.back() > cap * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "solve_ray: grid exceeds the admissible ray (max admissible t = " << cap << ")";
    throw PreconditionError(msg.str());
  }

  RayProfile profile;
  profile.t = t_grid;
  profile.f = f;
  profile.eta = eta;
  profile.t_max = cap;

  GaussOptions opts;
  opts.tol = tol;
  for (double t : t_grid) {
    opts.t = t;
    GaussSolution sol = solve_gauss(surface, f, eta, opts);
    profile.F.push_back(mean(exp_field(sol.u * 2.0)));
    opts.initial = sol.u.values();  // continuation warm start
    profile.u.push_back(std::move(sol.u));
  }
  return profile;
}

void ray_derivatives(const Surface& surface, RayProfile& profile, double tol) {
  const int n = surface.n_vertices();
  const Eigen::SparseMatrix<double>& s = surface.stiffness();
  const Eigen::VectorXd& mu = surface.mu();
  const Eigen::VectorXd& fv = profile.f.values();

  profile.udot.clear();
  profile.uddot.clear();
  profile.udot_max.clear();
  profile.uddot_max.clear();
  profile.uddot_combo_max.clear();

  for (size_t j = 0; j < profile.t.size(); ++j) {
    const double t = profile.t[j];
    const Eigen::VectorXd& u = profile.u[j].values();
    const Eigen::ArrayXd e2u = (2.0 * u).array().exp();
    const Eigen::ArrayXd e4u = (-4.0 * u).array().exp();
    const Eigen::VectorXd a = (4.0 * (e2u - e4u * t * fv.array())).matrix();
    if (a.minCoeff() <= 0.0) {
      std::ostringstream msg;
      msg << "ray_derivatives: linearized coefficient lost positivity at t = " << t
          << " (min " << a.minCoeff() << "); the sup bound e^{-6u} t f < 1 is broken";
      throw PreconditionError(msg.str());
    }

    Eigen::SparseMatrix<double> op = s;
    for (int i = 0; i < n; ++i) op.coeffRef(i, i) += mu[i] * a[i];
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("ray_derivatives: linearized operator factorization failed");
    }

    // Direct solve plus one round of iterative refinement, which buys the
    // couple of digits the raw factorization can leave on the table.
    auto solve_refined = [&](const Eigen::VectorXd& b) {
      Eigen::VectorXd x = llt.solve(b);
      x += llt.solve(b - op * x);
      return x;
    };

    // (Delta - a) udot = e^{-4u} f   <=>   (S + M a) udot = -M e^{-4u} f.
    const Eigen::VectorXd rhs1 = (e4u * fv.array()).matrix();
    const Eigen::VectorXd udot = solve_refined(-(mu.array() * rhs1.array()).matrix());
    const double res1 =
        ((op * udot + (mu.array() * rhs1.array()).matrix()).array() / mu.array())
            .abs()
            .maxCoeff();

    const Eigen::VectorXd rhs2 =
        (4.0 * (2.0 * e2u + 4.0 * e4u * t * fv.array()) * udot.array().square() -
         8.0 * e4u * fv.array() * udot.array())
            .matrix();
    const Eigen::VectorXd uddot = solve_refined(-(mu.array() * rhs2.array()).matrix());
    const double res2 =
        ((op * uddot + (mu.array() * rhs2.array()).matrix()).array() / mu.array())
            .abs()
            .maxCoeff();
    // Residuals are judged relative to the forcing scale; the second equation's
    // rhs grows like udot^2 toward the admissible cap.
    const double scale1 = 1.0 + rhs1.cwiseAbs().maxCoeff();
    const double scale2 = 1.0 + rhs2.cwiseAbs().maxCoeff();
    if (std::max(res1 / scale1, res2 / scale2) > tol) {
      throw ConvergenceError("ray_derivatives: linear solve residual above tolerance");
    }

    profile.udot_max.push_back(udot.maxCoeff());
    profile.uddot_max.push_back(uddot.maxCoeff());
    profile.uddot_combo_max.push_back(
        (uddot.array() + 2.0 * udot.array().square()).maxCoeff());
    profile.udot.push_back(surface.field(udot));
    profile.uddot.push_back(surface.field(uddot));
  }
  profile.has_derivatives = true;
}

std::vector<double> f_second_differences(const RayProfile& profile) {
  std::vector<double> dd;
  for (size_t j = 1; j + 1 < profile.t.size(); ++j) {
    const double h0 = profile.t[j] - profile.t[j - 1];
    const double h1 = profile.t[j + 1] - profile.t[j];
    const double s0 = (profile.F[j] - profile.F[j - 1]) / h0;
    const double s1 = (profile.F[j + 1] - profile.F[j]) / h1;
    dd.push_back(2.0 * (s1 - s0) / (h0 + h1));
  }
  return dd;
}

SlopeReport check_slope_inequality(const RayProfile& profile, double tol) {
  if (profile.t.size() < 2) {
    throw PreconditionError("check_slope_inequality: need at least two grid points");
  }
  const double mf = mean(profile.f);

  SlopeReport report;
  report.slope_exact = -2.0 * mf;
  report.slope_fd = (profile.F[1] - profile.F[0]) / (profile.t[1] - profile.t[0]);
  if (profile.has_derivatives) {
    report.slope_from_udot = mean(profile.udot[0]);
  }
  report.rel_err = (report.slope_exact == 0.0)
                       ? std::abs(report.slope_fd)
                       : std::abs(report.slope_fd - report.slope_exact) /
                             std::abs(report.slope_exact);

  report.max_violation = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < profile.t.size(); ++j) {
    report.max_violation =
        std::max(report.max_violation, profile.F[j] - (0.5 - 2.0 * profile.t[j] * mf));
  }
  report.holds_all = report.max_violation <= tol;
  return report;
}

VolumeSolve solve_gauss_with_volume(const Surface& surface, const ScalarField& f, double eta,
                                    double target_R, double tol) {
  if (!(target_R > 0.0 && target_R < 0.5)) {
    throw PreconditionError("solve_gauss_with_volume: R must lie in (0, 1/2)");
  }
  const double bal = balance_ratio(f);  // also enforces f >= 0, f != 0
  const double required = std::pow(2.0 + eta, 3) * target_R / (2.0 * eta);
  if (bal < required - 1e-12) {
    std::ostringstream msg;
    msg << "solve_gauss_with_volume: balance hypothesis fails (bal(f) = " << bal
        << ", required >= " << required << ")";
    throw PreconditionError(msg.str());
  }

  const double t_hi = max_admissible_t(f, eta);
  const double target = 0.5 - target_R;

  VolumeSolve out;
  out.target_R = target_R;
  out.balance = bal;
  out.required_balance = required;

  GaussOptions opts;
  opts.tol = std::min(1e-10, tol * 1e-2);

  auto eval = [&](double t, const std::optional<Eigen::VectorXd>& warm) {
    opts.t = t;
    opts.initial = warm;
    GaussSolution sol = solve_gauss(surface, f, eta, opts);
    ++out.evaluations;
    return sol;
  };

  // Bracket endpoints: F(0) = 1/2 > target; the slope bound plus the balance
  // hypothesis force F(t_hi) <= target.
  double lo = 0.0, hi = t_hi;
  GaussSolution sol_lo = eval(lo, std::nullopt);
  double f_lo = mean(exp_field(sol_lo.u * 2.0));
  GaussSolution sol_hi = eval(hi, sol_lo.u.values());
  double f_hi = mean(exp_field(sol_hi.u * 2.0));
  if (f_hi > target + tol) {
    std::ostringstream msg;
    msg << "solve_gauss_with_volume: target not bracketed (achieved normalized volume range ["
        << f_hi << ", " << f_lo << "], target " << target << ")";
    throw ConvergenceError(msg.str());
  }

  GaussSolution best = (std::abs(f_lo - target) < std::abs(f_hi - target)) ? sol_lo : sol_hi;
  double best_t = (std::abs(f_lo - target) < std::abs(f_hi - target)) ? lo : hi;
  double best_gap = std::abs(mean(exp_field(best.u * 2.0)) - target);

  for (int iter = 0; iter < 200 && best_gap > tol; ++iter) {
    // Secant proposal inside the bracket, bisection as the certified default.
    double t_next = 0.5 * (lo + hi);
    if (f_lo != f_hi) {
      const double secant = lo + (f_lo - target) * (hi - lo) / (f_lo - f_hi);
      if (secant > lo + 1e-3 * (hi - lo) && secant < hi - 1e-3 * (hi - lo)) {
        t_next = secant;
      }
    }
    const GaussSolution sol =
        eval(t_next, (t_next - lo < hi - t_next) ? sol_lo.u.values() : sol_hi.u.values());
    const double f_next = mean(exp_field(sol.u * 2.0));
    const double gap = std::abs(f_next - target);
    if (gap < best_gap) {
      best = sol;
      best_t = t_next;
      best_gap = gap;
    }
    if (f_next >= target) {
      lo = t_next;
      sol_lo = sol;
      f_lo = f_next;
    } else {
      hi = t_next;
      sol_hi = sol;
      f_hi = f_next;
    }
  }
  if (best_gap > tol) {
    std::ostringstream msg;
    msg << "solve_gauss_with_volume: bisection stalled (best |mean - target| = " << best_gap
        << ", tol " << tol << ")";
    throw ConvergenceError(msg.str());
  }

  out.solution = std::move(best);
  out.t = best_t;
  out.achieved_mean = mean(exp_field(out.solution.u * 2.0));
  return out;
}

}  // namespace curvlab
