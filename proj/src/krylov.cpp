#include "ellikernel/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ellikernel/errors.hpp"

namespace ellikernel::linalg {

Eigen::VectorXd krylov_expm_apply(const SparseMat& A, double t, const Eigen::VectorXd& v, double tol, int dim,
                                  KrylovStats* stats) {
  const Eigen::Index N = A.rows();
  KrylovStats local;
  Eigen::VectorXd w = v;
  const double vnorm = v.norm();
  if (t == 0.0 || vnorm == 0.0) {
    if (stats) *stats = local;
    return w;
  }
  const int m_max = static_cast<int>(std::min<Eigen::Index>(dim, N));
  const double anorm = [&] {
    double best = 0.0;
    for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
      double row = 0.0;
      for (SparseMat::InnerIterator it(A, r); it; ++it) row += std::abs(it.value());
      best = std::max(best, row);
    }
    return best;
  }();

  Eigen::MatrixXd V(N, m_max + 1);
  double t_done = 0.0;
  double tau = t;
  while (t_done < t) {
    const double beta = w.norm();
    if (beta == 0.0) break;
    V.col(0) = w / beta;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_max, m_max);
    double h_next = 0.0;
    int m = m_max;
    for (int j = 0; j < m_max; ++j) {
      Eigen::VectorXd u = A * V.col(j);
      ++local.matvecs;
      // Two passes of Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * u;
        u.noalias() -= V.leftCols(j + 1) * c;
        if (pass == 0) {
          T(j, j) = c[j];
          if (j > 0) T(j - 1, j) = T(j, j - 1);
        } else {
          T(j, j) += c[j];
        }
      }
      h_next = u.norm();
      if (h_next <= 1e-13 * std::max(anorm, 1e-300)) {
        // Invariant subspace: the projection is exact.
        m = j + 1;
        h_next = 0.0;
        break;
      }
      if (j + 1 < m_max) T(j + 1, j) = h_next;
      V.col(j + 1) = u / h_next;
    }
    const Eigen::MatrixXd Tm = T.topLeftCorner(m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
    const Eigen::VectorXd first_row = es.eigenvectors().row(0).transpose();

    tau = std::min(tau, t - t_done);
    Eigen::VectorXd y;
    double err = 0.0;
    for (;;) {
      const Eigen::VectorXd decay = (-tau * es.eigenvalues().array()).exp();
      y = es.eigenvectors() * decay.cwiseProduct(first_row);
      err = beta * h_next * std::abs(y[m - 1]);
      if (err <= tol * vnorm * tau / t || h_next == 0.0) break;
      tau *= 0.5;
      if (tau < 1e-14 * t) throw SolverError("krylov_expm_apply: step size collapsed");
    }
    w = beta * (V.leftCols(m) * y);
    t_done += tau;
    local.error_estimate += err;
    ++local.steps;
    tau *= 2.0;
  }
  if (stats) *stats = local;
  return w;
}

}  // namespace ellikernel::linalg
