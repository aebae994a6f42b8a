#pragma once

#include <optional>
#include <vector>

#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// Semilinear curvature equation  Delta u = 2 e^{2u} - 1 + e^{-4u} t f
// with data 0 <= t f <= eta/(2+eta)^3, eta in (0,1).  The solution lies in
// the bracket [-ln(2+eta)/2, -ln(2)/2] and obeys
//   sup(e^{-6u} t f) <= eta   and   sup|Delta u| <= eta/(2+eta).
// ---------------------------------------------------------------------------

struct GaussOptions {
  double t = 1.0;          // ray parameter multiplying f; 1 when unused
  double tol = 1e-10;      // sup-norm residual target
  int max_iter = 100;
  std::optional<Eigen::VectorXd> initial;  // warm start inside the bracket
};

struct GaussSolution {
  ScalarField u;
  ScalarField f;
  double t = 1.0;
  double eta = 0.0;
  double residual_sup = 0.0;       // independent re-evaluation of the PDE
  bool bracket_ok = false;         // u within [-ln(2+eta)/2, -ln 2/2]
  bool laplacian_bound_ok = false; // sup|Delta u| <= eta/(2+eta) + residual
  int newton_iterations = 0;
  int fallback_iterations = 0;
  bool used_fallback = false;

  double bracket_lo() const;
  double bracket_hi() const;
};

// Newton from the constant supersolution -ln(2)/2, iterates clamped to the
// bracket; if Newton stalls, a monotone shifted iteration with
// lambda = 4(1+1e-2) (dominating the linearization on the bracket) finishes
// the job.  Throws PreconditionError on inadmissible data (reports the worst
// vertex), ConvergenceError with the last residual on failure.
GaussSolution solve_gauss(const Surface& surface, const ScalarField& f, double eta,
                          const GaussOptions& opts = {});

// Constant-data solution: the root of 2 e^{2s} - 1 + w e^{-4s} on the
// bracket (unique there since the expression is strictly increasing in s).
// Bisection to machine precision; requires 0 <= w <= eta/(2+eta)^3.
double gauss_constant_root(double w, double eta);

// Finite-perturbation continuity probe: random admissible perturbations of
// sup-size <= eps, reporting the sup-difference of solutions per draw.
struct StabilityProbeReport {
  double eps = 0.0;
  int draws = 0;
  double max_diff = 0.0;
  double max_ratio = 0.0;  // max over draws of sup-diff / sup-perturbation
  std::vector<double> diffs;
};

StabilityProbeReport gauss_stability_probe(const Surface& surface, const ScalarField& f,
                                           double eta, double eps, int draws = 8,
                                           unsigned seed = 1234u);

// ---------------------------------------------------------------------------
// Zero-mean Poisson problem  Delta v = rhs,  mean(v) = 0.
// ---------------------------------------------------------------------------

struct PoissonNorms {
  double sup_v = 0.0;
  double l2_v = 0.0;
  double grad_v = 0.0;  // sqrt(v' S v)
  double l2_rhs = 0.0;
};

struct PoissonBoundReport {
  bool present = false;  // only filled when geometry constants were supplied
  double c_value = 0.0;  // C(delta, Lambda)
  double bound = 0.0;    // C * L2(rhs)
  double sup_v = 0.0;
  bool ok = false;       // sup_v <= bound; a violation flags the C_sob surrogate
};

struct PoissonOptions {
  double tol = 1e-10;        // sup-norm PDE residual target
  int max_iter = 2000;
  bool project_mean = false; // subtract mean(rhs) instead of erroring
  std::optional<Eigen::VectorXd> initial;
  const GeometryConstants* constants = nullptr;  // enables the bound report
};

struct PoissonSolution {
  ScalarField v;
  ScalarField rhs;  // after projection, when requested
  PoissonNorms norms;
  PoissonBoundReport bound_report;
  int iterations = 0;
  double residual_sup = 0.0;
};

// Conjugate gradients on S v = -M rhs preconditioned by a Cholesky factor of
// S + M, with the constant mode projected out every step (no vertex pinning).
PoissonSolution solve_poisson_zero_mean(const Surface& surface, const ScalarField& rhs,
                                        const PoissonOptions& opts = {});

// The three-link chain bounding the W^{2,2} norm of v by L2(rhs) through the
// spectral gap.  Pure evaluation with measured slack factors.
struct ChainLink {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs / rhs (0 when both vanish)
  bool holds = false;  // lhs <= rhs * (1 + 1e-8)
};

struct NormChainReport {
  double lambda = 0.0;
  ChainLink poincare;   // L2(v)        vs  L2(rhs) / Lambda
  ChainLink gradient;   // |grad v|^2   vs  L2(rhs)^2 / Lambda^2
  ChainLink w22;        // W^{2,2}(v)   vs  sqrt(1 + 2/L^2 + 1/L^3) L2(rhs)
};

NormChainReport poisson_norm_chain(const Surface& surface, const PoissonSolution& sol,
                                   double lambda);

}  // namespace curvlab
