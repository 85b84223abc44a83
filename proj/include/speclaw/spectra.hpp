#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "speclaw/ensembles.hpp"
#include "speclaw/qve.hpp"

namespace speclaw {

/// Symmetric tridiagonal T = Q^T A Q.
struct TridiagonalForm {
  Eigen::VectorXd diag;
  Eigen::VectorXd offdiag;
  /// Householder vectors below the first subdiagonal (LAPACK layout) and
  /// their coefficients; present when requested at reduction time.
  std::optional<Eigen::MatrixXd> reflectors;
  std::optional<Eigen::VectorXd> coeffs;

  int n() const { return static_cast<int>(diag.size()); }
  bool has_q() const { return reflectors.has_value(); }
  /// Forms Q explicitly. Throws MissingVectors without reflectors.
  Eigen::MatrixXd q() const;
  /// Applies Q to the columns of `z` in place (z <- Q z).
  void apply_q(Eigen::MatrixXd& z) const;
  Eigen::MatrixXd dense() const;
};

/// Householder reduction of the lower triangle. `accumulate_q` keeps the
/// reflectors so Q can be formed or applied later.
TridiagonalForm tridiagonalize(const Eigen::MatrixXd& a, bool accumulate_q = false);
TridiagonalForm tridiagonalize(const SampledMatrix& m, bool accumulate_q = false);

/// Number of eigenvalues <= x, from the signs of the LDL^T pivots of T - xI.
/// A pivot that is exactly zero counts as nonpositive.
int count_at_most(const TridiagonalForm& t, double x);

/// Eigenvalues in the half-open interval (lo, hi].
int count_in_interval(const TridiagonalForm& t, double lo, double hi);

/// Eigenvalues of T by implicit-shift QL, ascending.
Eigen::VectorXd tridiagonal_eigenvalues(const TridiagonalForm& t);

struct SpectrumSummary {
  Eigen::VectorXd eigenvalues;
  /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
  std::optional<Eigen::MatrixXd> eigenvectors;
  std::optional<Eigen::VectorXd> inf_norms;

  int n() const { return static_cast<int>(eigenvalues.size()); }
};

/// Eigenvalues by implicit QL on the tridiagonal form; eigenvectors (when
/// requested) by inverse iteration on T and back-transformation with Q.
SpectrumSummary eigen_full(const Eigen::MatrixXd& a, bool want_vectors);
SpectrumSummary eigen_full(const SampledMatrix& m, bool want_vectors);

/// Same, but eigenvectors only for eigenvalues inside [lo, hi]; the other
/// columns are left as zero and their inf_norms as NaN.
SpectrumSummary eigen_selected(const Eigen::MatrixXd& a, double lo, double hi);

/// Spectrum of T itself. Eigenvalues come from implicit QL on each unreduced
/// block; eigenvectors (in the coordinates of T) from inverse iteration with
/// reorthogonalization inside clusters, for eigenvalues in [lo, hi] only.
SpectrumSummary tridiagonal_eigen(const TridiagonalForm& t, bool want_vectors,
                                  double lo = -std::numeric_limits<double>::infinity(),
                                  double hi = std::numeric_limits<double>::infinity());

/// (1/n) sum_i 1 / (lambda_i - z).
std::complex<double> stieltjes_empirical(const SpectrumSummary& s, SpectralPoint point);
std::complex<double> stieltjes_empirical(const Eigen::VectorXd& eigenvalues, SpectralPoint point);

struct SchurCheck {
  std::complex<double> direct;
  std::complex<double> schur;
  double discrepancy() const { return std::abs(direct - schur); }
};

/// Diagonal resolvent entry ((W - z)^{-1})_kk computed by a dense solve and by
/// the Schur complement 1 / (w_kk - z - a_k^T (W^(k) - z)^{-1} a_k).
SchurCheck schur_resolvent_check(const Eigen::MatrixXd& w, int k, SpectralPoint point);
SchurCheck schur_resolvent_check(const SampledMatrix& m, int k, SpectralPoint point);

/// max_k |u_i[k]| per eigenvector. Throws MissingVectors.
Eigen::VectorXd eigvec_inf_norms(const SpectrumSummary& s);

}  // namespace speclaw
