#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "speclaw/ensembles.hpp"
#include "speclaw/errors.hpp"
#include "speclaw/spectra.hpp"

using namespace speclaw;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng) / std::sqrt(double(n));
  return a;
}

// Reference eigenvalues from Eigen's dense solver.
Eigen::VectorXd oracle_eigenvalues(const Eigen::MatrixXd& a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues();
}

int oracle_count(const Eigen::VectorXd& ev, double lo, double hi) {
  return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double v) { return v > lo && v <= hi; }));
}

}  // namespace

TEST_CASE("2x2 tridiagonal input") {
  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  const auto t = tridiagonalize(a);
  CHECK(t.diag.isZero(0.0));
  CHECK(std::abs(t.offdiag(0)) == 1.0);
  CHECK(count_in_interval(t, 0.5, 1.5) == 1);
  CHECK(count_in_interval(t, -1.0, 1.0) == 1);
  CHECK(count_in_interval(t, -1.5, 1.0) == 2);
}

TEST_CASE("tridiagonal input is unchanged up to offdiagonal signs") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) a(i, i) = i - 2.0;
  for (int i = 0; i < 4; ++i) a(i + 1, i) = a(i, i + 1) = 0.5 + i;
  const auto t = tridiagonalize(a);
  for (int i = 0; i < 5; ++i) CHECK(t.diag(i) == doctest::Approx(a(i, i)).epsilon(1e-14));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(t.offdiag(i)) == doctest::Approx(a(i + 1, i)).epsilon(1e-14));
}

TEST_CASE("diagonal counts and sorting") {
  const Eigen::MatrixXd a = Eigen::Vector3d(1, 2, 3).asDiagonal();
  CHECK(count_in_interval(tridiagonalize(a), 1.5, 3.5) == 2);
  CHECK(count_in_interval(tridiagonalize(a), 1.0, 3.0) == 2);
  CHECK(count_in_interval(tridiagonalize(a), 2.0, 2.0) == 0);
  CHECK_THROWS_AS(count_in_interval(tridiagonalize(a), 3.0, 2.0), Error);
  const Eigen::MatrixXd b = Eigen::Vector3d(3, 1, 2).asDiagonal();
  CHECK(eigen_full(b, false).eigenvalues == Eigen::Vector3d(1, 2, 3));
}

TEST_CASE("Householder preserves the spectrum and Q reconstructs A") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = random_symmetric(50, rng);
  const auto t = tridiagonalize(a, true);
  const Eigen::VectorXd ref = oracle_eigenvalues(a);
  const Eigen::VectorXd got = oracle_eigenvalues(t.dense());
  CHECK((ref - got).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd q = t.q();
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(50, 50)).norm() < 1e-12);
  CHECK((q * t.dense() * q.transpose() - a).norm() < 1e-12);
  CHECK((tridiagonal_eigenvalues(t) - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Sturm counts against the dense oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd a = random_symmetric(rep == 0 ? 200 : 10 + 9 * rep, rng);
    const auto t = tridiagonalize(a);
    const Eigen::VectorXd ev = oracle_eigenvalues(a);
    for (int k = 0; k < 100; ++k) {
      double lo = u(rng), hi = u(rng);
      if (lo > hi) std::swap(lo, hi);
      CHECK(count_in_interval(t, lo, hi) == oracle_count(ev, lo, hi));
      const double mid = 0.5 * (lo + hi);
      CHECK(count_in_interval(t, lo, mid) + count_in_interval(t, mid, hi) == count_in_interval(t, lo, hi));
    }
  }
}

TEST_CASE("Sturm counts with repeated and clustered eigenvalues") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(30, 30);
  a.bottomRightCorner(10, 10) *= -1.0;
  const auto t = tridiagonalize(a);
  CHECK(count_in_interval(t, 0.0, 1.0) == 20);
  CHECK(count_in_interval(t, -1.0, 0.0) == 0);
  CHECK(count_in_interval(t, -1.5, -1.0) == 10);
  // Zero matrix: every pivot sits on the shift.
  const auto z = tridiagonalize(Eigen::MatrixXd::Zero(8, 8));
  CHECK(count_at_most(z, 0.0) == 8);
  CHECK(count_in_interval(z, -1.0, 0.0) == 8);
  CHECK(count_in_interval(z, 0.0, 1.0) == 0);
}

TEST_CASE("eigen_full on a 2x2 swap") {
  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  const auto s = eigen_full(a, true);
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  const auto norms = eigvec_inf_norms(s);
  CHECK(norms(0) == doctest::Approx(0.7071067811865476));
  CHECK(norms(1) == doctest::Approx(0.7071067811865476));
  CHECK(std::abs(std::abs((*s.eigenvectors)(0, 0)) - 0.7071067811865476) < 1e-14);
}

TEST_CASE("eigenpairs: residuals, orthonormality, trace") {
  std::mt19937_64 rng(3);
  for (int n : {1, 2, 17, 100, 257}) {
    const Eigen::MatrixXd a = random_symmetric(n, rng);
    const auto s = eigen_full(a, true);
    const Eigen::MatrixXd& v = *s.eigenvectors;
    const double scale = std::max(1.0, a.norm());
    CHECK((a * v - v * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11 * scale);
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(s.eigenvalues.sum() - a.trace()) < 1e-9 * scale);
    CHECK((s.eigenvalues - oracle_eigenvalues(a)).cwiseAbs().maxCoeff() < 1e-12 * scale);
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  }
}

TEST_CASE("eigenvectors of a matrix with a tight cluster stay orthogonal") {
  std::mt19937_64 rng(4);
  const int n = 60;
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_symmetric(n, rng)).householderQ();
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
  d.segment(10, 5).setConstant(0.25);
  d(15) = 0.25 + 1e-13;
  const Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  const auto s = eigen_full(Eigen::MatrixXd(0.5 * (a + a.transpose())), true);
  const Eigen::MatrixXd& v = *s.eigenvectors;
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a * v - v * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("selected eigenpairs") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = random_symmetric(80, rng);
  const auto full = eigen_full(a, true);
  const auto sel = eigen_selected(a, -0.5, 0.5);
  CHECK((sel.eigenvalues - full.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 80; ++i) {
    const double lam = full.eigenvalues(i);
    if (lam > -0.5 && lam <= 0.5) {
      CHECK((*sel.inf_norms)(i) == doctest::Approx((*full.inf_norms)(i)).epsilon(1e-8));
    } else {
      CHECK(std::isnan((*sel.inf_norms)(i)));
    }
  }
}

TEST_CASE("missing vectors") {
  const auto s = eigen_full(Eigen::Matrix2d::Identity(), false);
  CHECK_THROWS_AS(eigvec_inf_norms(s), Error);
  const Eigen::MatrixXd d = Eigen::Vector4d(1, 2, 3, 4).asDiagonal();
  CHECK(eigvec_inf_norms(eigen_full(d, true)).isOnes(1e-15));
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(9, 9);
  const auto top = eigen_full(ones, true);
  CHECK((*top.inf_norms)(8) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empirical Stieltjes transform") {
  const Eigen::Vector2d ev(-1, 1);
  CHECK(std::abs(stieltjes_empirical(ev, SpectralPoint::make(0, 1)) - cd(0, 0.5)) < 1e-15);
  std::mt19937_64 rng(6);
  const Eigen::VectorXd spec = oracle_eigenvalues(random_symmetric(40, rng));
  const cd z(0, 1e6);
  CHECK(std::abs(stieltjes_empirical(ev, SpectralPoint::make(0, 1e6)) + 1.0 / z) < 1e-17);
  // Nonzero spectral mean shifts the next order by mean / z^2.
  CHECK(std::abs(stieltjes_empirical(spec, SpectralPoint::make(0, 1e6)) + 1.0 / z + spec.mean() / (z * z)) < 1e-17);
}

TEST_CASE("empirical transform of a dense sample tracks the semicircle") {
  WignerSpec w;
  w.n = 2000;
  w.profile = VarianceProfile::constant(2000);
  w.seed = 1;
  const auto s = eigen_full(sample_wigner(w), false);
  CHECK(std::abs(stieltjes_empirical(s, SpectralPoint::make(0, 0.05)) - cd(0, 0.9753124511871278)) < 0.05);
}

TEST_CASE("Schur complement identity") {
  const Eigen::MatrixXd d = Eigen::Vector3d(0.5, -1.0, 2.0).asDiagonal();
  const auto c = schur_resolvent_check(d, 1, SpectralPoint::make(0.3, 0.2));
  CHECK(std::abs(c.direct - 1.0 / (cd(-1.0) - cd(0.3, 0.2))) < 1e-15);
  CHECK(c.discrepancy() < 1e-15);

  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  a /= std::sqrt(2.0);
  const auto c2 = schur_resolvent_check(a, 0, SpectralPoint::make(0, 1));
  // (A - i)^{-1}_{00} = -i / (-1 - 1/2) = i * 2/3
  CHECK(std::abs(c2.direct - cd(0, 2.0 / 3.0)) < 1e-14);
  CHECK(c2.discrepancy() < 1e-14);

  std::mt19937_64 rng(7);
  const Eigen::MatrixXd r = random_symmetric(50, rng);
  for (int k = 0; k < 50; k += 5) CHECK(schur_resolvent_check(r, k, SpectralPoint::make(0.1 * k - 2, 0.01)).discrepancy() < 1e-10);
  CHECK_THROWS_AS(schur_resolvent_check(r, 50, SpectralPoint::make(0, 1)), Error);
}
