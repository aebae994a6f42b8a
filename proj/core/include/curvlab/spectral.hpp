#pragma once

#include <optional>
#include <string>

#include "curvlab/surface.hpp"

namespace curvlab {

// First k nonzero generalized eigenpairs of S x = lambda M x, constants
// deflated.  values ascending; fields are M-orthonormal columns.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd fields;
  double max_residual = 0.0;  // sup_k |S x_k - lambda_k M x_k|_{M^{-1}} / (1 + lambda_k)
};

// Blocked inverse iteration on (S + sigma M) with Rayleigh-Ritz extraction
// and explicit deflation of the constant mode.  Deterministic (fixed internal
// seed).  Throws ConvergenceError if residuals stay above tol.
EigenPairs spectral_gap(const Surface& surface, int k, double tol = 1e-11, int max_iter = 800);

enum class Provenance { kExact, kMeasured, kOverridden };
const char* provenance_name(Provenance p);

struct Quantity {
  double value = 0.0;
  Provenance provenance = Provenance::kMeasured;
};

// Constants feeding the sup-norm bound |v|_inf <= C(delta, Lambda) |rhs|_2
// for the zero-mean Poisson problem:
//   C(delta, Lambda) = C_sob * sqrt(1 + 2/Lambda^2 + 1/Lambda^3).
struct GeometryConstants {
  Quantity delta;    // injectivity-radius surrogate (systole-based upper bound or user value)
  Quantity lambda;   // spectral gap
  Quantity vol;
  Quantity c_sob;    // Sobolev/Morrey surrogate
  std::string c_sob_mode;  // "empirical(m)" or "fixed"

  double poisson_constant() const;
};

struct PoissonConstantOptions {
  int empirical_m = 20;                    // eigenfields probed by the empirical surrogate
  std::optional<double> fixed_c_sob;       // bypasses the empirical mode
  std::optional<double> delta_override;
  std::optional<double> lambda_override;
};

// Assembles GeometryConstants.  The empirical C_sob surrogate is the max of
// sup|phi| / sqrt(L2(phi)^2 + 2|grad phi|_2^2 + L2(Delta phi)^2) over the
// first m eigenfields — a measured calibration, not a proven bound; its mode
// is recorded so every downstream report can say so.  Needs eigenpairs; pass
// precomputed ones to avoid a fresh eigensolve.
GeometryConstants poisson_constant(const Surface& surface, const PoissonConstantOptions& opts = {},
                                   const EigenPairs* precomputed = nullptr);

// The empirical Sobolev quotient by itself.
double empirical_c_sob(const Surface& surface, const EigenPairs& pairs, int m);

}  // namespace curvlab
