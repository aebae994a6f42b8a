#pragma once

#include <optional>
#include <vector>

#include "curvlab/elliptic.hpp"
#include "curvlab/ray.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// Real-hyperbolic-4-space normalization.  The curvature equation becomes
//   Delta u = e^{2u} - 1 + e^{-4u} t f,   4/(4+eta) <= e^{2u} <= 1,
// with eta in (0, 1/2), and the volume prescription mean(e^{2u}) = 1 - R.
// The substitution u = u~ + ln(2)/2 maps it onto the standard solver with
// data f/4, parameter eta/2 and volume target R/2; a direct Newton solve of
// the equation above serves as an independent cross-check of that reduction.
// ---------------------------------------------------------------------------

struct H4GaussOptions {
  double volume_tol = 1e-8;   // |mean(e^{2u}) - (1-R)| target
  double newton_tol = 1e-10;  // native-path sup residual target
  int newton_max_iter = 100;
  bool native_check = true;   // run the direct Newton path and record the gap
  // When set, require bal(f) >= (8+eta)^3 R/(16 eta) (the full existence
  // hypothesis); the reduction itself only needs (4+eta)^3 R/(16 eta).
  bool require_stated_balance = true;
};

struct H4GaussSolution {
  ScalarField u;
  ScalarField f;
  double t = 0.0;
  double eta = 0.0;
  double target_R = 0.0;
  double achieved_mean = 0.0;  // mean(e^{2u})
  double residual_sup = 0.0;   // sup |Delta u - (e^{2u}-1+e^{-4u} t f)|
  double af_sup = 0.0;         // sup e^{-6u} t f  (stays <= eta, in fact <= eta/4)
  bool bracket_ok = false;     // u within [ln(4/(4+eta))/2, 0]
  bool native_checked = false;
  double two_path_gap = 0.0;   // sup |u_reduction - u_newton|
  double balance = 0.0;
  double required_balance = 0.0;
  int evaluations = 0;

  double bracket_lo() const;
  double bracket_hi() const;  // always 0
};

// Volume-prescribed solve in the 4-space normalization.  Constant data has
// the closed form u = ln(1-R)/2, t*f = R(1-R)^2.
H4GaussSolution solve_gauss_h4(const Surface& surface, const ScalarField& f, double eta,
                               double R, const H4GaussOptions& opts = {});

// Largest admissible ray parameter: sup(t f) <= 16 eta/(4+eta)^3.
double max_admissible_t_h4(const ScalarField& f, double eta);

struct H4Problem {
  const Surface* surface = nullptr;
  ScalarField f;
  double eta = 0.0;
  double R = 0.0;
  double A = 0.0;  // balance level bal(f) is checked against this
  double C = 0.0;  // Poisson sup constant C(delta, Lambda)
  double vol = 0.0;
};

// Existence hypothesis for the coupled system:
//   bal(f) >= A   and   A exp(-4 C eta sqrt(Vol)/(4+eta)) >= (8+eta)^3 R/(16 eta).
// w_radius = C eta sqrt(Vol)/(4+eta) bounds sup|w| along the iteration.
struct H4HypothesisReport {
  double bal = 0.0;
  double A = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double w_radius = 0.0;
  bool bal_ok = false;
  bool exp_ok = false;
  bool ok() const { return bal_ok && exp_ok; }
};

H4HypothesisReport check_hypothesis_h4(const H4Problem& problem);

struct H4Options {
  int max_iter = 200;
  double drift_tol = 1e-8;
  double theta = 1.0;  // damping, halved automatically when the drift grows
  bool override_hypothesis = false;
  double volume_tol = 1e-8;
  double pde_tol = 1e-10;
  double mean_tol = 1e-6;
  bool native_check = true;
  const GeometryConstants* constants = nullptr;
};

struct H4IterationRecord {
  int index = 0;
  double drift = 0.0;
  double t = 0.0;
  double w_sup = 0.0;
  bool w_ok = false;  // sup|w| <= w_radius
  double theta = 1.0;
};

// Coupled system in the (u, w) variables
//   Delta u = e^{2u} - 1 + e^{-4u} e^{2w} t f,   Delta w = R - 1 + e^{2u},
// and equivalently in v = w - u
//   Delta u = e^{2u} - 1 + e^{-2u} e^{2v} t f,   Delta v = R - e^{-2u} e^{2v} t f.
// Both residual pairs are recomputed through the shared Laplacian; the bound
// quantity satisfies e^{-6u} e^{2w} t f == e^{-4u} e^{2v} t f identically.
struct H4Certificate {
  ScalarField u;
  ScalarField w;
  ScalarField v;  // w - u
  ScalarField fhat;
  double t = 0.0;
  int iterations = 0;
  bool converged = false;
  bool hypothesis_ok = false;
  bool hypothesis_overridden = false;
  double final_drift = 0.0;
  double theta_final = 1.0;
  std::vector<H4IterationRecord> history;

  double residual_gauss_w = 0.0;
  double residual_poisson_w = 0.0;
  double residual_gauss_v = 0.0;
  double residual_poisson_v = 0.0;

  double af_bound_w = 0.0;      // sup e^{-6u} e^{2w} t f
  double af_bound_v = 0.0;      // sup e^{-4u} e^{2v} t f
  double af_identity_gap = 0.0; // relative gap between the two (algebraically 0)

  double w_radius = 0.0;
  double w_sup = 0.0;
  bool w_ok = false;
  double two_path_gap = 0.0;
  bool native_checked = false;
  double fixed_point_gap = 0.0;  // sup |fhat - e^{2w} f|
};

// Picard iteration fhat -> (u, t) -> w -> e^{2w} f starting from fhat = f.
// Constant data converges in a single step.
H4Certificate run_fixed_point_h4(const H4Problem& problem, const H4Options& opts = {});

}  // namespace curvlab
