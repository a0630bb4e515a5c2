#include "ellikernel/garding.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ellikernel/dense_eigen.hpp"
#include "ellikernel/errors.hpp"

namespace ellikernel {

LaplacianCongruence::LaplacianCongruence(const SparseOperator& laplacian) : grid_(laplacian.grid()) {
  const auto eig = linalg::sym_eig(laplacian.dense());
  const auto N = eig.values.size();
  const double top = eig.values[N - 1];
  // The torus Laplacian has exactly one null direction (constants).
  if (std::abs(eig.values[0]) > 1e-10 * top || eig.values[1] <= 1e-10 * top) {
    throw std::runtime_error("laplacian does not have a one-dimensional null space");
  }
  W_ = eig.vectors.rightCols(N - 1) * eig.values.tail(N - 1).cwiseInverse().cwiseSqrt().asDiagonal();
}

GardingResult garding_constant(const SparseOperator& H, const LaplacianCongruence& congruence) {
  if (!(H.grid() == congruence.grid())) throw std::invalid_argument("garding_constant: grid mismatch");
  const Eigen::MatrixXd& W = congruence.whitening();
  const Eigen::MatrixXd HW = H.matrix() * W;
  Eigen::MatrixXd M = W.transpose() * HW;
  M = 0.5 * (M + M.transpose()).eval();
  auto low = linalg::sym_eig_lowest(std::move(M));

  GardingResult res;
  res.mu = low.value;
  res.nu = 0.0;
  res.eigvec = W * low.vector;
  res.eigvec.normalize();
  res.method = "dense";
  return res;
}

GardingResult garding_constant(const SparseOperator& H, const SparseOperator& laplacian, const GardingOptions& opts) {
  if (!(H.grid() == laplacian.grid())) throw std::invalid_argument("garding_constant: grid mismatch");
  if (H.size() <= opts.dense_threshold) return garding_constant(H, LaplacianCongruence(laplacian));
  return garding_constant_iterative(H, laplacian, opts);
}

namespace {

void project_mean_zero(Eigen::Ref<Eigen::VectorXd> v) { v.array() -= v.mean(); }

}  // namespace

GardingResult garding_constant_iterative(const SparseOperator& H, const SparseOperator& laplacian,
                                         const GardingOptions& opts) {
  const auto N = static_cast<Eigen::Index>(H.size());
  const SparseMat& A = H.matrix();
  const SparseMat& B = laplacian.matrix();

  // Preconditioner: approximate (Delta + tau I)^{-1}, tau well below the first nonzero Laplacian eigenvalue.
  const double L = H.grid().length();
  const double tau = 1.0 / (L * L);
  SparseMat shifted = B;
  for (Eigen::Index i = 0; i < N; ++i) shifted.coeffRef(i, i) += tau;
  Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper> inner;
  inner.setTolerance(1e-4);
  inner.setMaxIterations(400);
  inner.compute(shifted);

  auto b_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(v.dot(B * v), 0.0)); };

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd x(N);
  for (Eigen::Index i = 0; i < N; ++i) x[i] = uni(rng);
  project_mean_zero(x);
  x /= b_norm(x);
  Eigen::VectorXd p;
  double lambda = x.dot(A * x);

  GardingResult res;
  res.method = "lobpcg";
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::VectorXd Ax = A * x;
    const Eigen::VectorXd Bx = B * x;
    Eigen::VectorXd r = Ax - lambda * Bx;
    const double rnorm = r.norm();
    const double scale = Ax.norm() + std::abs(lambda) * Bx.norm();
    res.iterations = it;
    res.residual = scale > 0.0 ? rnorm / scale : 0.0;
    if (rnorm <= opts.rel_tol * scale) {
      res.mu = lambda;
      res.eigvec = x.normalized();
      return res;
    }

    Eigen::VectorXd w = inner.solve(r);
    project_mean_zero(w);

    // Rayleigh-Ritz on span{x, w, p}, dropping p if the basis is ill-conditioned.
    for (int attempt = 0; attempt < 2; ++attempt) {
      const bool use_p = attempt == 0 && p.size() == N;
      const Eigen::Index k = use_p ? 3 : 2;
      Eigen::MatrixXd S(N, k);
      S.col(0) = x;
      S.col(1) = w / std::max(b_norm(w), 1e-300);
      if (use_p) S.col(2) = p / std::max(b_norm(p), 1e-300);
      const Eigen::MatrixXd AS = A * S;
      const Eigen::MatrixXd BS = B * S;
      Eigen::MatrixXd GA = S.transpose() * AS;
      Eigen::MatrixXd GB = S.transpose() * BS;
      GA = 0.5 * (GA + GA.transpose()).eval();
      GB = 0.5 * (GB + GB.transpose()).eval();

      Eigen::LLT<Eigen::MatrixXd> llt(GB);
      if (llt.info() != Eigen::Success) continue;
      const Eigen::MatrixXd Lc = llt.matrixL();
      if (Lc.diagonal().minCoeff() < 1e-8 * Lc.diagonal().maxCoeff()) continue;
      const Eigen::MatrixXd Linv = Lc.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
      Eigen::MatrixXd red = Linv * GA * Linv.transpose();
      red = 0.5 * (red + red.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(red);
      const Eigen::VectorXd y = Linv.transpose() * es.eigenvectors().col(0);

      Eigen::VectorXd xn = S * y;
      p = S.rightCols(k - 1) * y.tail(k - 1);
      project_mean_zero(xn);
      project_mean_zero(p);
      const double nb = b_norm(xn);
      x = xn / nb;
      p /= nb;
      lambda = x.dot(A * x);
      break;
    }
  }
  throw SolverError("garding_constant: LOBPCG did not converge in " + std::to_string(opts.max_iterations) +
                    " iterations (relative residual " + std::to_string(res.residual) + ")");
}

}  // namespace ellikernel
