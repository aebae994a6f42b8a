#include "curvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "curvlab/errors.hpp"
#include "curvlab/systole.hpp"

namespace curvlab {

namespace {

// M-inner product with diagonal mass.
double dot_m(const Eigen::VectorXd& mu, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a.array() * mu.array() * b.array()).sum();
}

// Modified Gram-Schmidt in the M-inner product; drops near-null columns.
void orthonormalize_m(const Eigen::VectorXd& mu, Eigen::MatrixXd& x) {
  for (int j = 0; j < x.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        x.col(j) -= dot_m(mu, x.col(i), x.col(j)) * x.col(i);
      }
    }
    const double norm = std::sqrt(std::max(dot_m(mu, x.col(j), x.col(j)), 0.0));
    if (norm < 1e-300) {
      throw ConvergenceError("eigensolver: iteration block became rank-deficient");
    }
    x.col(j) /= norm;
  }
}

}  // namespace

EigenPairs spectral_gap(const Surface& surface, int k, double tol, int max_iter) {
  const int n = surface.n_vertices();
  if (k < 1) throw PreconditionError("spectral_gap: k >= 1 required");
  if (k > n - 2) throw PreconditionError("spectral_gap: k exceeds nonconstant mode count");

  const Eigen::SparseMatrix<double>& s = surface.stiffness();
  const Eigen::VectorXd& mu = surface.mu();

  // Shifted operator S + sigma*M is SPD (S is PSD, M positive diagonal);
  // one factorization drives every iteration.
  const double sigma = 1.0;
  Eigen::SparseMatrix<double> shifted = s;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma * mu[i];
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw ConvergenceError("eigensolver: shifted operator factorization failed");
  }

  // Constant mode, M-normalized, deflated explicitly from every block.
  Eigen::VectorXd constant = Eigen::VectorXd::Ones(n) / std::sqrt(mu.sum());
  auto deflate = [&](Eigen::MatrixXd& x) {
    for (int j = 0; j < x.cols(); ++j) {
      x.col(j) -= dot_m(mu, constant, x.col(j)) * constant;
    }
  };

  // Extra columns absorb eigenvalue clusters (flat-torus spectra carry
  // multiplicity 4); fixed seed keeps runs bit-reproducible.
  const int block = std::min(k + 8, n - 2);
  std::mt19937 rng(0x5eedu);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd x(n, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = unif(rng);
  }
  deflate(x);
  orthonormalize_m(mu, x);

  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(block);
  Eigen::VectorXd residuals = Eigen::VectorXd::Constant(block, 1.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    // Inverse iteration step: Y = (S + sigma*M)^{-1} (M X).
    Eigen::MatrixXd y = llt.solve(mu.asDiagonal() * x);
    deflate(y);
    orthonormalize_m(mu, y);

    // Rayleigh-Ritz on the block.
    Eigen::MatrixXd small = y.transpose() * (s * y);
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    if (es.info() != Eigen::Success) {
      throw ConvergenceError("eigensolver: dense Rayleigh-Ritz step failed");
    }
    x = y * es.eigenvectors();
    ritz = es.eigenvalues();

    // Relative Ritz residual in the M^{-1} norm (M-normalized vectors).
    Eigen::MatrixXd rmat = s * x - mu.asDiagonal() * (x * ritz.asDiagonal());
    for (int j = 0; j < block; ++j) {
      const double rn = std::sqrt((rmat.col(j).array().square() / mu.array()).sum());
      residuals[j] = rn / (1.0 + ritz[j]);
    }
    if (residuals.head(k).maxCoeff() <= tol) break;
    if (iter == max_iter - 1) {
      throw ConvergenceError("eigensolver: residual stalled above tolerance");
    }
  }

  EigenPairs out;
  out.values = ritz.head(k);
  out.fields = x.leftCols(k);
  out.max_residual = residuals.head(k).maxCoeff();
  return out;
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kExact: return "exact";
    case Provenance::kMeasured: return "measured";
    case Provenance::kOverridden: return "overridden";
  }
  return "unknown";
}

double GeometryConstants::poisson_constant() const {
  const double l = lambda.value;
  return c_sob.value * std::sqrt(1.0 + 2.0 / (l * l) + 1.0 / (l * l * l));
}

double empirical_c_sob(const Surface& surface, const EigenPairs& pairs, int m) {
  if (m < 1) throw PreconditionError("empirical_c_sob: m >= 1 required");
  if (m > pairs.values.size()) {
    throw PreconditionError("empirical_c_sob: m exceeds computed eigenpair count");
  }
  const Eigen::VectorXd& mu = surface.mu();
  const Eigen::SparseMatrix<double>& s = surface.stiffness();
  double best = 0.0;
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd phi = pairs.fields.col(j);
    const double l2_sq = (phi.array().square() * mu.array()).sum();
    const double grad_sq = phi.dot(s * phi);
    // Laplacian of phi pointwise: -M^{-1} S phi.
    const Eigen::VectorXd lap = -(s * phi).array() / mu.array();
    const double lap_sq = (lap.array().square() * mu.array()).sum();
    const double w22 = std::sqrt(l2_sq + 2.0 * grad_sq + lap_sq);
    best = std::max(best, phi.cwiseAbs().maxCoeff() / w22);
  }
  return best;
}

GeometryConstants poisson_constant(const Surface& surface, const PoissonConstantOptions& opts,
                                   const EigenPairs* precomputed) {
  GeometryConstants out;
  out.vol = {surface.volume(), Provenance::kMeasured};

  EigenPairs local;
  const EigenPairs* pairs = precomputed;
  const bool need_pairs =
      !opts.lambda_override.has_value() || !opts.fixed_c_sob.has_value();
  if (need_pairs && pairs == nullptr) {
    const int want = opts.fixed_c_sob.has_value() ? 1 : opts.empirical_m;
    local = spectral_gap(surface, want);
    pairs = &local;
  }

  if (opts.lambda_override.has_value()) {
    out.lambda = {*opts.lambda_override, Provenance::kOverridden};
  } else {
    out.lambda = {pairs->values[0], Provenance::kMeasured};
  }
  if (out.lambda.value <= 0.0) {
    throw PreconditionError("poisson_constant: spectral gap must be positive");
  }

  if (opts.fixed_c_sob.has_value()) {
    out.c_sob = {*opts.fixed_c_sob, Provenance::kOverridden};
    out.c_sob_mode = "fixed";
  } else {
    out.c_sob = {empirical_c_sob(surface, *pairs, opts.empirical_m), Provenance::kMeasured};
    out.c_sob_mode = "empirical(" + std::to_string(opts.empirical_m) + ")";
  }
  if (out.c_sob.value <= 0.0) {
    throw PreconditionError("poisson_constant: C_sob must be positive");
  }

  if (opts.delta_override.has_value()) {
    out.delta = {*opts.delta_override, Provenance::kOverridden};
  } else {
    out.delta = {systole(surface).value, Provenance::kMeasured};
  }
  return out;
}

}  // namespace curvlab
