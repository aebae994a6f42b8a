#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <limits>

#include "curvlab/mesh.hpp"

namespace curvlab {

class Surface;

// Per-vertex scalar field bound to the surface it lives on.  Arithmetic is
// only defined between fields of the same surface object.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const Surface* surface, Eigen::VectorXd values);

  const Surface& surface() const;
  const Eigen::VectorXd& values() const { return v_; }
  Eigen::VectorXd& values() { return v_; }
  double operator[](int i) const { return v_[i]; }
  int size() const { return static_cast<int>(v_.size()); }

  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(const ScalarField& o) const;  // pointwise
  ScalarField operator*(double s) const;
  ScalarField operator+(double s) const;
  ScalarField operator-(double s) const;

 private:
  void check_same(const ScalarField& o) const;
  const Surface* surface_ = nullptr;
  Eigen::VectorXd v_;
};

ScalarField exp_field(const ScalarField& f);             // e^{f} pointwise
ScalarField apply(const ScalarField& f, const std::function<double(double)>& fn);

// Area-weighted functionals (current metric).
double integral(const ScalarField& f);   // sum mu_i f_i
double mean(const ScalarField& f);       // integral / Vol
double sup_abs(const ScalarField& f);
double field_max(const ScalarField& f);
double field_min(const ScalarField& f);
double l2_norm(const ScalarField& f);    // sqrt(sum mu_i f_i^2)
double dirichlet_energy(const ScalarField& f);  // f' S f
// mean(f)/sup(f) in (0,1] for nonnegative f; errors on the zero field.
double balance_ratio(const ScalarField& f);

// Discrete Laplacian, sign convention Delta = trace Hessian (nonpositive at
// interior maxima): Delta f = -M^{-1} S f.
ScalarField laplacian(const ScalarField& f);

struct UniformizeOptions {
  double tol = 1e-8;      // sup-norm tolerance on the curvature residual
  int max_iter = 100;
  int max_halvings = 60;  // Newton step halving cap
};

// Triangle mesh with an intrinsic metric plus a per-vertex conformal factor.
// `uniformize` rescales the metric to constant curvature -1 by a damped
// Newton iteration on the vertexwise curvature equation
//     S phi + K0 + mu0 .* exp(2 phi) = 0
// (S = cotangent stiffness of the input metric, K0 = input angle defects,
// mu0 = input lumped vertex areas).  The 2D Dirichlet form is conformally
// invariant, so S never changes; only the mass weights depend on phi.  The
// equation is the gradient of a strictly convex energy, so the solution is
// unique and Newton with halving is globally convergent.
class Surface {
 public:
  Surface() = default;  // empty shell; aggregate holders fill it by move
  Surface(const Surface&) = delete;
  Surface& operator=(const Surface&) = delete;
  Surface(Surface&&) = default;
  Surface& operator=(Surface&&) = default;

  static Surface uniformize(TriangleMesh mesh, const UniformizeOptions& opts = {});
  // Warm-started variant (re-runs from a previous conformal factor).
  static Surface uniformize(TriangleMesh mesh, const Eigen::VectorXd& initial_phi,
                            const UniformizeOptions& opts = {});
  // Takes the metric as given (phi = 0), no curvature claim.  Intended for
  // operator unit tests (e.g. the flat torus); not accepted by solvers that
  // require curvature -1.
  static Surface assemble_flat(TriangleMesh mesh);
  // Rebuilds a surface from mesh + known conformal factor without solving
  // (used by covers, where curvature -1 lifts verbatim).
  static Surface from_phi(TriangleMesh mesh, Eigen::VectorXd phi);

  const TriangleMesh& mesh() const { return mesh_; }
  int n_vertices() const { return mesh_.n_vertices(); }
  int genus() const { return mesh_.genus(); }
  bool is_hyperbolic() const { return hyperbolic_; }
  double volume() const { return vol_; }

  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return S_; }
  // Input-metric angle defect per vertex (curvature measure before the
  // conformal change).
  const Eigen::VectorXd& angle_defect0() const { return k0_; }
  const Eigen::VectorXd& mu0() const { return mu0_; }

  double curvature_residual() const { return curvature_residual_; }
  int uniformize_iterations() const { return iterations_; }
  int negative_cotan_edges() const { return negative_cotan_edges_; }

  // Edge length under the conformal metric: l0 * exp((phi_a + phi_b)/2).
  double conformal_edge_length(int e) const;

  ScalarField field(double constant) const;
  ScalarField field(Eigen::VectorXd values) const;
  ScalarField zero_field() const { return field(0.0); }

 private:
  static Surface assemble(TriangleMesh mesh);  // S, mu0, K0 of the input metric
  void apply_phi(Eigen::VectorXd phi);

  TriangleMesh mesh_;
  bool hyperbolic_ = false;
  double vol_ = 0.0;
  double curvature_residual_ = std::numeric_limits<double>::quiet_NaN();
  int iterations_ = 0;
  int negative_cotan_edges_ = 0;
  Eigen::VectorXd phi_, mu_, mu0_, k0_;
  Eigen::SparseMatrix<double> S_;
};

}  // namespace curvlab
