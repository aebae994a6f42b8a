#pragma once

#include <vector>

#include "curvlab/elliptic.hpp"
#include "curvlab/surface.hpp"

namespace curvlab {

// One-parameter family u_t solving Delta u_t = 2e^{2u_t} - 1 + e^{-4u_t} t f
// together with the normalized volume fraction F(t) = mean(e^{2u_t}) and the
// t-derivative fields.  F starts at 1/2, is nonincreasing and concave.
struct RayProfile {
  std::vector<double> t;
  std::vector<ScalarField> u;
  std::vector<double> F;
  ScalarField f;
  double eta = 0.0;
  double t_max = 0.0;  // admissible cap eta / ((2+eta)^3 sup f)

  bool has_derivatives = false;
  std::vector<ScalarField> udot;
  std::vector<ScalarField> uddot;
  // Pointwise sign controls per grid point (maxima; all should be <= ~tol):
  std::vector<double> udot_max;          // sup u_dot
  std::vector<double> uddot_max;         // sup u_ddot
  std::vector<double> uddot_combo_max;   // sup (u_ddot + 2 u_dot^2)
};

// Largest t with sup(t f) <= eta/(2+eta)^3; +inf when f vanishes identically.
double max_admissible_t(const ScalarField& f, double eta);

// Chebyshev-spaced grid on [0, t_end] (clusters at both endpoints, where the
// concavity checks are most delicate).  points >= 2, grid[0] == 0 exactly.
std::vector<double> chebyshev_grid(double t_end, int points = 33);

// Continuation along the grid, each solve warm-started from the previous t.
RayProfile solve_ray(const Surface& surface, const ScalarField& f, double eta,
                     const std::vector<double>& t_grid, double tol = 1e-10);

// Fills udot/uddot by linearized solves
//   (Delta - a) u_dot  = e^{-4u} f,
//   (Delta - a) u_ddot = 4(2e^{2u} + 4e^{-4u}tf) u_dot^2 - 8 e^{-4u} f u_dot,
// with a = 4(e^{2u} - e^{-4u} t f) > 0; refuses when positivity fails.
void ray_derivatives(const Surface& surface, RayProfile& profile, double tol = 1e-10);

// Second divided differences of F on the (non-uniform) grid; concavity means
// every entry is <= ~0 up to solver noise.
std::vector<double> f_second_differences(const RayProfile& profile);

struct SlopeReport {
  bool holds_all = false;      // F(t) <= 1/2 - 2 t mean(f) + tol at all grid t
  double max_violation = 0.0;  // max over grid of F(t) - (1/2 - 2 t mean(f))
  double slope_fd = 0.0;       // (F(t1) - F(0)) / t1
  double slope_exact = 0.0;    // -2 mean(f)
  double slope_from_udot = 0.0;  // mean(u_dot at t=0), equals the exact slope
  double rel_err = 0.0;        // |fd - exact| / |exact| (0 when exact == 0)
};

SlopeReport check_slope_inequality(const RayProfile& profile, double tol = 1e-9);

// Volume-prescribed solve: find t with mean(e^{2u_t}) = 1/2 - R.  Requires
// the balance hypothesis bal(f) = mean(f)/sup(f) >= (2+eta)^3 R / (2 eta),
// which makes the target bracketed inside [0, t_max] via the slope bound.
struct VolumeSolve {
  GaussSolution solution;
  double t = 0.0;
  double target_R = 0.0;
  double achieved_mean = 0.0;  // mean(e^{2u})
  double balance = 0.0;
  double required_balance = 0.0;
  int evaluations = 0;
};

VolumeSolve solve_gauss_with_volume(const Surface& surface, const ScalarField& f, double eta,
                                    double target_R, double tol = 1e-8);

}  // namespace curvlab
