#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace mlda {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Singular values below this fraction of the largest one count as zero when
/// reporting rank.
inline constexpr double kRankRelTol = 1e-12;

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Column-major stacking: entry (i, j) of a p x q matrix lands at index i + p*j,
/// so that vec(A X B) = (B^T kron A) vec(X).
template <class Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> vec(const Eigen::MatrixBase<Derived>& m) {
  Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> out = m.derived().reshaped();
  return out;
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
  return v.derived().reshaped(rows, cols);
}

template <class Scalar>
struct SvdFactorsT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> left;       // p x r, orthonormal columns
  Eigen::Vector<Scalar, Eigen::Dynamic> singulars;                  // nonincreasing, >= 0
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> right;      // q x r, orthonormal columns
};
using SvdFactors = SvdFactorsT<double>;

template <class Derived>
SvdFactorsT<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::BDCSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(
      m.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Sum of singular values.
template <class Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::BDCSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m.derived());
  return svd.singularValues().sum();
}

/// Largest singular value by power iteration on M^T M (relative tolerance
/// 1e-10, at most 10000 iterations).
template <class Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using VecS = Eigen::Vector<Scalar, Eigen::Dynamic>;
  const auto& mat = m.derived();
  const Eigen::Index q = mat.cols();
  if (mat.size() == 0 || mat.cwiseAbs().maxCoeff() == Scalar(0)) return Scalar(0);

  // A mildly sloped deterministic start; falls back to basis vectors if the
  // first sweep annihilates it.
  VecS v = VecS::LinSpaced(q, Scalar(1), Scalar(1) + Scalar(1e-3) * Scalar(q > 1 ? q - 1 : 1));
  v.normalize();
  VecS w = mat * v;
  for (Eigen::Index j = 0; w.norm() == Scalar(0) && j < q; ++j) {
    v = VecS::Unit(q, j);
    w = mat * v;
  }
  if (w.norm() == Scalar(0)) return Scalar(0);

  Scalar lambda = w.squaredNorm();
  for (int it = 0; it < 10000; ++it) {
    VecS u = mat.transpose() * w;
    const Scalar un = u.norm();
    if (un == Scalar(0)) break;
    v = u / un;
    w = mat * v;
    const Scalar next = w.squaredNorm();
    const Scalar change = std::abs(next - lambda);
    lambda = next;
    if (change <= Scalar(1e-10) * lambda) break;
  }
  return std::sqrt(lambda);
}

/// Proximal operator of tau * ||.||_*: soft-shrink the singular values, keep
/// the singular vectors. Optionally reports the surviving singular values.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> svt(
    const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tau,
    Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic>* shrunk_singulars = nullptr) {
  using Scalar = typename Derived::Scalar;
  using MatS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (tau < Scalar(0)) throw std::invalid_argument("svt: tau must be nonnegative");
  if (tau == Scalar(0)) {
    if (shrunk_singulars) {
      Eigen::BDCSVD<MatS> svd(m.derived());
      *shrunk_singulars = svd.singularValues();
    }
    return m.derived();
  }
  Eigen::BDCSVD<MatS> svd(m.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tau) ++r;
  if (shrunk_singulars) *shrunk_singulars = (s.head(r).array() - tau).matrix();
  if (r == 0) return MatS::Zero(m.rows(), m.cols());
  return svd.matrixU().leftCols(r) * (s.head(r).array() - tau).matrix().asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

/// Entrywise sign(m) * (|m| - tau)_+, the proximal operator of tau * ||.||_{1,1}.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> soft_threshold(
    const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (tau < Scalar(0)) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
  return m.derived().unaryExpr([tau](Scalar x) {
    const Scalar mag = std::abs(x) - tau;
    return mag > Scalar(0) ? (x > Scalar(0) ? mag : -mag) : Scalar(0);
  });
}

template <class Derived>
int rank_from_singulars(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  if (s.size() == 0) return 0;
  const Scalar cutoff = Scalar(kRankRelTol) * s.maxCoeff();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > Scalar(0)) ++r;
  return r;
}

template <class Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::BDCSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m.derived());
  return rank_from_singulars(svd.singularValues());
}

}  // namespace mlda
