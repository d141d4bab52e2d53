#include "lft/eigs.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lft/rng.hpp"

namespace lft {

namespace {

EigPairs dense_lowest(const Eigen::SparseMatrix<double>& A,
                      const Eigen::VectorXd& w, int k, double cell) {
  const int n = static_cast<int>(A.rows());
  const Eigen::ArrayXd si = w.array().sqrt().inverse();
  Eigen::MatrixXd B = Eigen::MatrixXd(A);
  B = si.matrix().asDiagonal() * B * si.matrix().asDiagonal();
  B = 0.5 * (B + B.transpose());  // kill asymmetric roundoff
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw NumericalError("dense eigensolver failed to converge");
  EigPairs out;
  out.theta = es.eigenvalues().head(k);
  out.vectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = si.matrix().asDiagonal() * es.eigenvectors().col(j);
    const double nrm = std::sqrt(cell * v.dot(w.asDiagonal() * v));
    out.vectors.col(j) = v / nrm;
  }
  return out;
}

// Block Lanczos with full reorthogonalization on M = E^{1/2} A^{-1} E^{1/2};
// largest eigenvalues of M are 1/theta for the smallest theta.
EigPairs lanczos_lowest(const Eigen::SparseMatrix<double>& A,
                        const Eigen::VectorXd& w, int k, double cell, double tol) {
  const int n = static_cast<int>(A.rows());
  const int b = 2;  // handles the double degeneracies of disk modes
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success)
    throw NumericalError("lanczos: factorization failed");
  const Eigen::ArrayXd sq = w.array().sqrt();

  auto op_apply = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
    Eigen::MatrixXd Y = sq.matrix().asDiagonal() * X;
    Y = llt.solve(Y);
    return sq.matrix().asDiagonal() * Y;
  };

  int mblocks = std::min(n / b, std::max((2 * k + 160) / b, 60));
  int prev_mblocks = 0;
  for (int attempt = 0; attempt < 3 && mblocks > prev_mblocks; ++attempt) {
    prev_mblocks = mblocks;
    const int m = mblocks * b;
    Eigen::MatrixXd Q(n, m + b);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);

    // deterministic pseudo-random start block
    Eigen::MatrixXd v0(n, b);
    for (int c = 0; c < b; ++c)
      for (int i = 0; i < n; ++i)
        v0(i, c) = rng::normal(0x5eedULL, 101 + c, static_cast<std::uint64_t>(i));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr0(v0);
    Q.leftCols(b) = qr0.householderQ() * Eigen::MatrixXd::Identity(n, b);

    Eigen::MatrixXd Bprev = Eigen::MatrixXd::Zero(b, b);
    int built = 0;
    for (int i = 0; i < mblocks; ++i) {
      Eigen::MatrixXd W = op_apply(Q.middleCols(i * b, b));
      if (i > 0) W -= Q.middleCols((i - 1) * b, b) * Bprev.transpose();
      Eigen::MatrixXd Ai = Q.middleCols(i * b, b).transpose() * W;
      Ai = 0.5 * (Ai + Ai.transpose());
      W -= Q.middleCols(i * b, b) * Ai;
      // full reorthogonalization, twice
      for (int pass = 0; pass < 2; ++pass) {
        const auto Qb = Q.leftCols((i + 1) * b);
        W -= Qb * (Qb.transpose() * W);
      }
      T.block(i * b, i * b, b, b) = Ai;
      built = (i + 1) * b;
      if (i + 1 == mblocks) break;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
      Eigen::MatrixXd R = qr.matrixQR().topRows(b).triangularView<Eigen::Upper>();
      Q.middleCols((i + 1) * b, b) = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
      T.block((i + 1) * b, i * b, b, b) = R;
      T.block(i * b, (i + 1) * b, b, b) = R.transpose();
      Bprev = R;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(built, built));
    // largest Ritz values of M
    const int got = std::min(k, built);
    bool converged = (got == k);
    EigPairs out;
    out.theta.resize(k);
    out.vectors.resize(n, k);
    for (int j = 0; j < got; ++j) {
      const int idx = built - 1 - j;  // descending in M
      const double beta = es.eigenvalues()(idx);
      if (beta <= 0) { converged = false; break; }
      const Eigen::VectorXd s = es.eigenvectors().col(idx);
      // residual estimate from the last block row
      const double res = (T.block(built - b, built - b, b, b) * s.tail(b)).norm();
      if (res > tol * std::max(beta, 1e-30) * 50) converged = false;
      Eigen::VectorXd y = Q.leftCols(built) * s;          // M-eigenvector
      Eigen::VectorXd v = (y.array() / sq).matrix();      // generalized eigvec
      const double nrm = std::sqrt(cell * v.dot(w.asDiagonal() * v));
      out.theta(j) = 1.0 / beta;  // descending beta = ascending theta
      out.vectors.col(j) = v / nrm;
    }
    if (converged) return out;
    mblocks = std::min(n / b, mblocks * 2);
  }
  throw NumericalError("lanczos: eigenpairs did not converge after restarts");
}

}  // namespace

EigPairs generalized_lowest(const Eigen::SparseMatrix<double>& A,
                            const Eigen::VectorXd& w, int k, double cell,
                            double tol) {
  const int n = static_cast<int>(A.rows());
  if (k <= 0 || k > n) throw UsageError("eigen count k out of range");
  if ((w.array() <= 0.0).any()) throw UsageError("eigen weight must be positive");
  if (n <= 3600 || k > n / 3) return dense_lowest(A, w, k, cell);
  return lanczos_lowest(A, w, k, cell, tol);
}

}  // namespace lft
