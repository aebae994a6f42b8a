#include "curvlab/surface.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

#include "curvlab/errors.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(const Surface* surface, Eigen::VectorXd values)
    : surface_(surface), v_(std::move(values)) {
  if (surface_ == nullptr) throw PreconditionError("field needs a surface");
  if (v_.size() != surface_->n_vertices())
    throw PreconditionError("field size does not match surface vertex count");
}

const Surface& ScalarField::surface() const {
  if (surface_ == nullptr) throw PreconditionError("field has no surface");
  return *surface_;
}

void ScalarField::check_same(const ScalarField& o) const {
  if (surface_ == nullptr || o.surface_ == nullptr)
    throw PreconditionError("field has no surface");
  if (surface_ != o.surface_)
    throw PreconditionError("fields belong to different surfaces");
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  check_same(o);
  return ScalarField(surface_, v_ + o.v_);
}
ScalarField ScalarField::operator-(const ScalarField& o) const {
  check_same(o);
  return ScalarField(surface_, v_ - o.v_);
}
ScalarField ScalarField::operator*(const ScalarField& o) const {
  check_same(o);
  return ScalarField(surface_, v_.cwiseProduct(o.v_));
}
ScalarField ScalarField::operator*(double s) const { return ScalarField(surface_, v_ * s); }
ScalarField ScalarField::operator+(double s) const {
  return ScalarField(surface_, (v_.array() + s).matrix());
}
ScalarField ScalarField::operator-(double s) const { return *this + (-s); }

ScalarField exp_field(const ScalarField& f) {
  return ScalarField(&f.surface(), f.values().array().exp().matrix());
}

ScalarField apply(const ScalarField& f, const std::function<double(double)>& fn) {
  Eigen::VectorXd v = f.values();
  for (int i = 0; i < v.size(); ++i) v[i] = fn(v[i]);
  return ScalarField(&f.surface(), std::move(v));
}

double integral(const ScalarField& f) { return f.surface().mu().dot(f.values()); }
double mean(const ScalarField& f) { return integral(f) / f.surface().volume(); }
double sup_abs(const ScalarField& f) { return f.values().cwiseAbs().maxCoeff(); }
double field_max(const ScalarField& f) { return f.values().maxCoeff(); }
double field_min(const ScalarField& f) { return f.values().minCoeff(); }
double l2_norm(const ScalarField& f) {
  return std::sqrt(f.surface().mu().cwiseProduct(f.values()).dot(f.values()));
}
double dirichlet_energy(const ScalarField& f) {
  return f.values().dot(f.surface().stiffness() * f.values());
}
double balance_ratio(const ScalarField& f) {
  if (field_min(f) < 0.0) {
    throw PreconditionError("balance_ratio: field must be nonnegative");
  }
  const double sup = field_max(f);
  if (sup <= 0.0) {
    throw PreconditionError("balance_ratio: field is identically zero");
  }
  return mean(f) / sup;
}

ScalarField laplacian(const ScalarField& f) {
  const Surface& s = f.surface();
  Eigen::VectorXd lap = -(s.stiffness() * f.values()).cwiseQuotient(s.mu());
  return ScalarField(&s, std::move(lap));
}

// ---------------------------------------------------------------------------
// Surface assembly

Surface Surface::assemble(TriangleMesh mesh) {
  Surface s;
  const int nv = mesh.n_vertices();
  const int nf = mesh.n_faces();

  // Cotangent weights per edge, lumped areas and angle defects per vertex,
  // all from the input intrinsic metric.
  Eigen::VectorXd cot_weight = Eigen::VectorXd::Zero(mesh.n_edges());
  s.mu0_ = Eigen::VectorXd::Zero(nv);
  s.k0_ = Eigen::VectorXd::Constant(nv, 2.0 * std::numbers::pi);
  for (int f = 0; f < nf; ++f) {
    const double area = mesh.face_area(f);
    for (int c = 0; c < 3; ++c) {
      const int v = mesh.faces()[f][c];
      const double ang = mesh.corner_angle(f, c);
      s.mu0_[v] += area / 3.0;
      s.k0_[v] -= ang;
      cot_weight[mesh.face_edges(f)[c]] += 0.5 / std::tan(ang);
    }
  }
  s.negative_cotan_edges_ = 0;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (cot_weight[e] < -1e-14) ++s.negative_cotan_edges_;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.n_edges()) * 4);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    const double w = cot_weight[e];
    trip.emplace_back(ed.a, ed.b, -w);
    trip.emplace_back(ed.b, ed.a, -w);
    trip.emplace_back(ed.a, ed.a, w);
    trip.emplace_back(ed.b, ed.b, w);
  }
  s.S_.resize(nv, nv);
  s.S_.setFromTriplets(trip.begin(), trip.end());
  s.S_.makeCompressed();

  s.mesh_ = std::move(mesh);
  return s;
}

void Surface::apply_phi(Eigen::VectorXd phi) {
  phi_ = std::move(phi);
  mu_ = mu0_.cwiseProduct((2.0 * phi_.array()).exp().matrix());
  vol_ = mu_.sum();
}

Surface Surface::assemble_flat(TriangleMesh mesh) {
  Surface s = assemble(std::move(mesh));
  s.apply_phi(Eigen::VectorXd::Zero(s.mesh_.n_vertices()));
  s.hyperbolic_ = false;
  return s;
}

Surface Surface::from_phi(TriangleMesh mesh, Eigen::VectorXd phi) {
  Surface s = assemble(std::move(mesh));
  if (phi.size() != s.mesh_.n_vertices())
    throw PreconditionError("conformal factor size does not match vertex count");
  s.apply_phi(std::move(phi));
  // Residual of the curvature-(-1) equation for the supplied factor.
  const Eigen::VectorXd g =
      s.S_ * s.phi_ + s.k0_ + s.mu0_.cwiseProduct((2.0 * s.phi_.array()).exp().matrix());
  s.curvature_residual_ = g.cwiseQuotient(s.mu_).cwiseAbs().maxCoeff();
  s.hyperbolic_ = true;
  return s;
}

Surface Surface::uniformize(TriangleMesh mesh, const UniformizeOptions& opts) {
  Surface probe = assemble(std::move(mesh));
  if (probe.mesh_.genus() < 2)
    throw PreconditionError("uniformization to curvature -1 requires genus >= 2, got genus " +
                            std::to_string(probe.mesh_.genus()));
  // Constant start matching total area to -2 pi chi.
  const double chi = probe.mesh_.euler_characteristic();
  const double c0 = 0.5 * std::log(-2.0 * std::numbers::pi * chi / probe.mu0_.sum());
  const int nv = probe.mesh_.n_vertices();
  return uniformize(std::move(probe.mesh_), Eigen::VectorXd::Constant(nv, c0), opts);
}

Surface Surface::uniformize(TriangleMesh mesh, const Eigen::VectorXd& initial_phi,
                            const UniformizeOptions& opts) {
  Surface s = assemble(std::move(mesh));
  const int nv = s.mesh_.n_vertices();
  if (s.mesh_.genus() < 2)
    throw PreconditionError("uniformization to curvature -1 requires genus >= 2, got genus " +
                            std::to_string(s.mesh_.genus()));
  if (initial_phi.size() != nv)
    throw PreconditionError("initial conformal factor size does not match vertex count");

  Eigen::VectorXd phi = initial_phi;
  auto conformal_mass = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return s.mu0_.cwiseProduct((2.0 * p.array()).exp().matrix());
  };
  auto grad = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return s.S_ * p + s.k0_ + conformal_mass(p);
  };
  // Strictly convex energy whose gradient is the curvature equation.
  auto energy = [&](const Eigen::VectorXd& p) -> double {
    return 0.5 * p.dot(s.S_ * p) + s.k0_.dot(p) + 0.5 * conformal_mass(p).sum();
  };

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  Eigen::SparseMatrix<double> J = s.S_;  // reused pattern
  double res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const Eigen::VectorXd g = grad(phi);
    const Eigen::VectorXd mass = conformal_mass(phi);
    res = g.cwiseQuotient(mass).cwiseAbs().maxCoeff();
    if (res <= opts.tol) break;

    J = s.S_;
    for (int i = 0; i < nv; ++i) J.coeffRef(i, i) += 2.0 * mass[i];
    llt.compute(J);
    if (llt.info() != Eigen::Success)
      throw ConvergenceError("uniformization Jacobian factorization failed");
    const Eigen::VectorXd step = llt.solve(-g);

    const double e0 = energy(phi);
    const double slope = g.dot(step);  // negative for a descent direction
    double alpha = 1.0;
    int halvings = 0;
    while (halvings < opts.max_halvings) {
      const Eigen::VectorXd cand = phi + alpha * step;
      if (energy(cand) <= e0 + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
      ++halvings;
    }
    if (halvings >= opts.max_halvings)
      throw ConvergenceError("uniformization line search exhausted its halving budget");
    phi += alpha * step;
  }
  if (res > opts.tol) {
    // Final candidate may have just reached tolerance on the last update.
    const Eigen::VectorXd g = grad(phi);
    res = g.cwiseQuotient(conformal_mass(phi)).cwiseAbs().maxCoeff();
    if (res > opts.tol)
      throw ConvergenceError("uniformization did not reach tolerance: residual " +
                             std::to_string(res));
  }

  s.apply_phi(std::move(phi));
  s.curvature_residual_ = res;
  s.iterations_ = it;
  s.hyperbolic_ = true;
  return s;
}

double Surface::conformal_edge_length(int e) const {
  const auto& ed = mesh_.edges()[e];
  return ed.length * std::exp(0.5 * (phi_[ed.a] + phi_[ed.b]));
}

ScalarField Surface::field(double constant) const {
  return ScalarField(this, Eigen::VectorXd::Constant(n_vertices(), constant));
}

ScalarField Surface::field(Eigen::VectorXd values) const {
  return ScalarField(this, std::move(values));
}

}  // namespace curvlab
