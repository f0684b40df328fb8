#pragma once

// Sylvester solver AX + XB = C via a precomputed eigendecomposition of the
// two coefficient matrices. All operators in this project are symmetric
// (tridiagonal or congruence projections of such), so the symmetric path is
// the common case; a complex eigendecomposition backs general inputs.

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "nsrom/grid.hpp"

namespace nsrom {

struct SingularPencilError : std::runtime_error {
  int i, j;
  SingularPencilError(int i_, int j_)
      : std::runtime_error("Sylvester pencil is singular: eigenvalue sum a[" +
                           std::to_string(i_) + "] + b[" + std::to_string(j_) +
                           "] is (numerically) zero"),
        i(i_), j(j_) {}
};

class SylvesterFactorization {
 public:
  // relative threshold below which an eigenvalue-sum pair counts as singular
  static constexpr double kSingularTol = 1e-12;

  SylvesterFactorization() = default;

  static SylvesterFactorization factorize(const Mat& A, const Mat& B) {
    if (A.rows() != A.cols() || B.rows() != B.cols())
      throw std::invalid_argument("factorize: A and B must be square");
    SylvesterFactorization f;
    f.m_ = static_cast<int>(A.rows());
    f.k_ = static_cast<int>(B.rows());
    f.symmetric_ = isSymmetric(A) && isSymmetric(B);
    if (f.symmetric_) {
      Eigen::SelfAdjointEigenSolver<Mat> ea(A), eb(B);
      f.QA_ = ea.eigenvectors();
      f.la_ = ea.eigenvalues();
      f.QAinv_ = f.QA_.transpose();
      f.QB_ = eb.eigenvectors();
      f.lb_ = eb.eigenvalues();
      f.QBinv_ = f.QB_.transpose();
    } else {
      Eigen::EigenSolver<Mat> ea(A), eb(B.transpose());
      f.cQA_ = ea.eigenvectors();
      f.cla_ = ea.eigenvalues();
      f.cQB_ = eb.eigenvectors();
      f.clb_ = eb.eigenvalues();
      Eigen::FullPivLU<Eigen::MatrixXcd> luA(f.cQA_), luB(f.cQB_);
      if (!luA.isInvertible() || !luB.isInvertible())
        throw std::invalid_argument("factorize: coefficient matrix is not diagonalizable");
      f.cQAinv_ = luA.inverse();
      f.cQBinv_ = luB.inverse();
      double condA = f.cQA_.norm() * f.cQAinv_.norm();
      double condB = f.cQB_.norm() * f.cQBinv_.norm();
      if (condA > 1e10 || condB > 1e10)
        throw std::invalid_argument("factorize: eigenvector matrix too ill-conditioned");
    }
    f.scale_ = std::max(f.eigMaxAbs(true), f.eigMaxAbs(false));
    f.singular_pair_ = f.findSingularPair();
    return f;
  }

  int rows() const { return m_; }
  int cols() const { return k_; }
  bool symmetric() const { return symmetric_; }
  bool hasSingularPair() const { return singular_pair_.has_value(); }

  double eigenvalueA(int i) const { return symmetric_ ? la_(i) : cla_(i).real(); }
  double eigenvalueB(int j) const { return symmetric_ ? lb_(j) : clb_(j).real(); }

  // Solve AX + XB = C. With deflate=true, components along (numerically)
  // zero eigenvalue sums are dropped instead of divided, which yields the
  // minimum-norm solution of a compatible singular system (the pressure
  // Poisson case: the constant nullspace is projected out).
  Mat solve(const Mat& C, bool deflate = false) const {
    if (C.rows() != m_ || C.cols() != k_)
      throw std::invalid_argument("solve: right-hand side has wrong dimensions");
    const double tol = kSingularTol * std::max(scale_, 1e-300);
    if (!deflate && singular_pair_)
      throw SingularPencilError(singular_pair_->first, singular_pair_->second);
    if (symmetric_) {
      Mat Y = QAinv_ * C * QBinv_.transpose();
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < k_; ++j) {
          double s = la_(i) + lb_(j);
          Y(i, j) = (std::abs(s) < tol) ? 0.0 : Y(i, j) / s;
        }
      return QA_ * Y * QB_.transpose();
    }
    Eigen::MatrixXcd Y = cQAinv_ * C.cast<std::complex<double>>() * cQBinv_.transpose();
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < k_; ++j) {
        std::complex<double> s = cla_(i) + clb_(j);
        Y(i, j) = (std::abs(s) < tol) ? 0.0 : Y(i, j) / s;
      }
    return (cQA_ * Y * cQB_.transpose()).real();
  }

  // Rebuild A from its factors (diagnostic; reconstruction error is a
  // factorization-quality invariant).
  Mat reconstructA() const {
    if (symmetric_) return QA_ * la_.asDiagonal() * QAinv_;
    return (cQA_ * cla_.asDiagonal() * cQAinv_).real();
  }
  Mat reconstructB() const {
    if (symmetric_) return QB_ * lb_.asDiagonal() * QBinv_;
    return (cQB_ * clb_.asDiagonal() * cQBinv_).real().transpose();
  }

 private:
  static bool isSymmetric(const Mat& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <=
           1e-13 * std::max(1.0, M.cwiseAbs().maxCoeff());
  }
  double eigMaxAbs(bool a) const {
    if (symmetric_) {
      const Vec& v = a ? la_ : lb_;
      return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    }
    const Eigen::VectorXcd& v = a ? cla_ : clb_;
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  }
  std::optional<std::pair<int, int>> findSingularPair() const {
    const double tol = kSingularTol * std::max(scale_, 1e-300);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < k_; ++j) {
        double s = symmetric_ ? la_(i) + lb_(j) : std::abs(cla_(i) + clb_(j));
        if (std::abs(s) < tol) return std::make_pair(i, j);
      }
    return std::nullopt;
  }

  int m_ = 0, k_ = 0;
  bool symmetric_ = true;
  double scale_ = 0.0;
  Mat QA_, QAinv_, QB_, QBinv_;
  Vec la_, lb_;
  Eigen::MatrixXcd cQA_, cQAinv_, cQB_, cQBinv_;
  Eigen::VectorXcd cla_, clb_;
  std::optional<std::pair<int, int>> singular_pair_;
};

inline SylvesterFactorization sylvester_factorize(const Mat& A, const Mat& B) {
  return SylvesterFactorization::factorize(A, B);
}

}  // namespace nsrom
