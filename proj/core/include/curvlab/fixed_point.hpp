#pragma once

#include <optional>
#include <vector>

#include "curvlab/elliptic.hpp"
#include "curvlab/ray.hpp"
#include "curvlab/spectral.hpp"
#include "curvlab/surface.hpp"

namespace curvlab {

// Data for the self-map Phi3 . Phi2 . Phi1 on
//   U1 = { fhat >= 0, bal(fhat) >= (2+eta)^3 R / (2 eta) }:
//   Phi1: volume-prescribed curvature solve, (uhat, t), mean e^{2uhat} = 1/2 - R;
//   Phi2: zero-mean Poisson solve of  Delta vhat = 3/2 - 3R - 3 e^{2uhat};
//   Phi3: fhat = e^{2vhat} f  (f the original data).
struct FixedPointProblem {
  const Surface* surface = nullptr;
  ScalarField f;
  double eta = 0.0;
  double R = 0.0;
  double A = 0.0;    // balance lower bound hypothesis
  double C = 0.0;    // Poisson sup-norm constant C(delta, Lambda)
  double vol = 0.0;  // surface volume entering the radius formula
};

// Radius of the sup-norm ball U3: 3 C eta sqrt(Vol) / (2 (2+eta)).
double u3_radius(double C, double eta, double vol);

struct HypothesisReport {
  double bal = 0.0;
  double A = 0.0;
  double lhs = 0.0;  // A * exp(-12 C eta sqrt(Vol) / (2(2+eta))) = A * exp(-4 * radius)
  double rhs = 0.0;  // (2+eta)^3 R / (2 eta)
  double radius = 0.0;
  bool bal_ok = false;
  bool exp_ok = false;
  bool ok() const { return bal_ok && exp_ok; }
};

HypothesisReport check_hypothesis(const FixedPointProblem& problem);

// Phi1: delegates to the volume-prescribed solve (checks U1 internally).
VolumeSolve phi1(const Surface& surface, const ScalarField& fhat, double eta, double R,
                 double tol = 1e-8);

// Phi2: the mean of the right-hand side vanishes exactly when uhat sits in
// U2; the residual mean inherited from the volume tolerance is projected,
// anything larger than mean_tol errors out.
PoissonSolution phi2(const Surface& surface, const ScalarField& uhat, double R,
                     double mean_tol = 1e-6, double tol = 1e-10,
                     const GeometryConstants* constants = nullptr);

struct Phi3Result {
  ScalarField fhat;
  double bal_f = 0.0;
  double bal_fhat = 0.0;
  double exp_factor = 0.0;  // e^{-4 sup|vhat|}; bal(fhat) >= exp_factor * bal(f)
};

// Phi3: fhat = e^{2 vhat} f, with the balance deterioration bound asserted.
Phi3Result phi3(const ScalarField& vhat, const ScalarField& f, double radius,
                double tol = 1e-9);

struct FixedPointOptions {
  int max_iter = 200;
  double drift_tol = 1e-8;        // sup-norm on consecutive fhat iterates
  double theta = 1.0;             // Picard damping, auto-halved on drift growth
  bool override_hypothesis = false;
  double volume_tol = 1e-8;
  double pde_tol = 1e-10;
  double mean_tol = 1e-6;
  const GeometryConstants* constants = nullptr;  // threads into phi2's report
};

struct IterationRecord {
  int index = 0;
  double drift = 0.0;
  double t = 0.0;
  double bal = 0.0;
  double theta = 0.0;
  bool u1_ok = false, u2_ok = false, u3_ok = false;
};

struct FixedPointCertificate {
  ScalarField u, v, fhat;
  double t = 0.0;
  int iterations = 0;
  bool converged = false;
  bool hypothesis_ok = false;
  bool hypothesis_overridden = false;
  double final_drift = 0.0;
  double theta_final = 1.0;
  std::vector<IterationRecord> history;

  // Recomputed independently of the solvers:
  double residual_gauss = 0.0;    // Delta u - (2e^{2u} - 1 + e^{-4u} e^{2v} t f)
  double residual_poisson = 0.0;  // Delta v - (3/2 - 3R - 3 e^{2u})
  bool u1_ok = false, u2_ok = false, u3_ok = false;
  double af_bound = 0.0;          // sup e^{-6u} e^{2v} t f
  double radius = 0.0;            // U3 radius used
  double fixed_point_gap = 0.0;   // sup|fhat - e^{2v} f|
};

FixedPointCertificate run_fixed_point(const FixedPointProblem& problem,
                                      const FixedPointOptions& opts = {});

// Standalone almost-Fuchsian evaluation of a triple (u, v, t) with data f:
// the immersion bound sup e^{-6u} e^{2v} t f <= eta < 1 plus both curvature
// equation residuals, with the volume defect R inferred from u when absent.
struct AfReport {
  double af_bound = 0.0;
  double eta = 0.0;
  double margin = 0.0;  // eta - af_bound
  double residual_u = 0.0;
  double residual_v = 0.0;
  double R_used = 0.0;
  bool r_inferred = false;
  bool pass = false;
};

AfReport af_certificate(const Surface& surface, const ScalarField& u, const ScalarField& v,
                        double t, const ScalarField& f, double eta,
                        std::optional<double> R = std::nullopt, double tol = 1e-6);

}  // namespace curvlab
