#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "speclaw/errors.hpp"
#include "speclaw/qve.hpp"

using namespace speclaw;
using cd = std::complex<double>;

namespace {

// Closed-form semicircle transform, branch with Im > 0.
cd m_sc(cd z) { return (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0)) / 2.0; }

VarianceProfile random_profile(int n, double lo, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, 1.0);
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = u(rng);
  return VarianceProfile::from_entries(s);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("spectral points live in the upper half plane") {
  CHECK(kind_of([] { SpectralPoint::make(0.0, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { SpectralPoint::make(0.0, -1.0); }) == ErrorKind::InvalidArgument);
  CHECK(SpectralPoint::make(1.0, 2.0).z() == cd(1.0, 2.0));
}

TEST_CASE("profile validation") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.5, 0.4, 1.0;
  CHECK(kind_of([&] { VarianceProfile::from_entries(s); }) == ErrorKind::InvalidProfile);
  s << 1.0, 0.0, 0.0, 1.0;
  CHECK(kind_of([&] { VarianceProfile::from_entries(s); }) == ErrorKind::InvalidProfile);
  s << 1.0, 1.5, 1.5, 1.0;
  CHECK(kind_of([&] { VarianceProfile::from_entries(s); }) == ErrorKind::InvalidProfile);
  s << 1.0, NAN, NAN, 1.0;
  CHECK(kind_of([&] { VarianceProfile::from_entries(s); }) == ErrorKind::InvalidProfile);

  CHECK(kind_of([] { BlockProfile::from_parts(Eigen::Vector2d(0.5, 0.6), Eigen::Matrix2d::Ones()); }) ==
        ErrorKind::InvalidProfile);
  CHECK(kind_of([] { BlockProfile::from_parts(Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Ones()); }) ==
        ErrorKind::InvalidProfile);
  CHECK_NOTHROW(BlockProfile::from_parts(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Ones()));
}

TEST_CASE("constant profile at z = 2i matches the semicircle transform") {
  const auto sol = solve_qve(VarianceProfile::constant(4), SpectralPoint::make(0.0, 2.0));
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(sol.g[k] - cd(0.0, 0.41421356237309505)) < 1e-9);
  CHECK(std::abs(sol.m - cd(0.0, 0.41421356237309505)) < 1e-9);
  CHECK(sol.residual <= 1e-10 * 2.0);
}

TEST_CASE("block profile with unit coefficients collapses to the constant case") {
  const auto block = BlockProfile::from_parts(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Ones());
  const auto sol = solve_qve(block, SpectralPoint::make(0.0, 2.0));
  CHECK(std::abs(sol.g[0] - cd(0.0, 0.41421356237309505)) < 1e-9);
  CHECK(std::abs(sol.g[1] - cd(0.0, 0.41421356237309505)) < 1e-9);
}

TEST_CASE("huge |z| gives g close to -1/z") {
  const auto sol = solve_qve(random_profile(6, 0.3, 1), SpectralPoint::make(0.0, 1e6));
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(std::abs(sol.g[k] - cd(0.0, 1e-6)) < 1e-15);
}

TEST_CASE("random profile residual by substitution") {
  const VarianceProfile p = random_profile(8, 0.5, 7);
  const auto sol = solve_qve(p, SpectralPoint::make(0.3, 0.05));
  CHECK(sol.residual <= 1e-10);
  // Independent substitution with the raw matrix.
  const cd z(0.3, 0.05);
  Eigen::VectorXcd sg = p.entries().cast<cd>() * sol.g / 8.0;
  double worst = 0.0;
  for (int k = 0; k < 8; ++k) worst = std::max(worst, std::abs(1.0 / sol.g[k] + z + sg[k]));
  CHECK(worst <= 1e-10);
  CHECK(std::abs(sol.m - sol.g.mean()) < 1e-15);
  for (int k = 0; k < 8; ++k) {
    CHECK(sol.g[k].imag() > 0.0);
    CHECK(std::abs(sol.g[k]) <= 1.0 / 0.05);
  }
}

TEST_CASE("continuation reaches the real axis on the physical branch") {
  const auto p = VarianceProfile::constant(3);
  const auto at0 = solve_qve_continuation(p, 0.0, 1.0, 1e-6, 40);
  CHECK(std::abs(at0.m - m_sc(cd(0.0, 1e-6))) < 1e-8);
  CHECK(std::abs(at0.m.imag() - 1.0) < 1e-5);
  const auto outside = solve_qve_continuation(p, 3.0, 1.0, 1e-6, 40);
  CHECK(outside.m.imag() <= 1e-4);
  const auto same = solve_qve_continuation(p, 0.7, 0.2, 0.2, 10);
  const auto direct = solve_qve(p, SpectralPoint::make(0.7, 0.2));
  CHECK(same.m == direct.m);
  CHECK(kind_of([&] { solve_qve_continuation(p, 0.0, 1e-3, 1.0, 5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("semicircle agreement across the spectrum") {
  const auto p = VarianceProfile::constant(1);
  for (double x : {-2.5, -1.9, -1.0, 0.0, 0.4, 1.99, 2.0, 2.01, 3.0}) {
    for (double eta : {1.0, 1e-2, 1e-4}) {
      const auto sol = solve_qve_continuation(p, x, 1.0, eta, 30);
      CHECK(std::abs(sol.m - m_sc(cd(x, eta))) < 1e-8);
    }
  }
}

TEST_CASE("too few iterations report non-convergence") {
  SolverOptions opts;
  opts.max_iter = 2;
  CHECK(kind_of([&] { solve_qve(VarianceProfile::constant(2), SpectralPoint::make(0.0, 0.01), opts); }) ==
        ErrorKind::NonConvergence);
}

TEST_CASE("density of the constant profile") {
  const auto p = VarianceProfile::constant(5);
  const std::vector<double> grid{-2.5, -1.0, 0.0, 1.0, 2.5};
  const auto curve = extract_density(p, grid);
  CHECK(curve.values[2] == doctest::Approx(0.3183098861837907).epsilon(1e-4));
  CHECK(curve.values[0] <= 1e-4);
  CHECK(curve.values[4] <= 1e-4);
  CHECK(std::abs(curve.values[1] - curve.values[3]) <= 1e-8);
  for (double v : curve.values) CHECK(v >= 0.0);
  CHECK(curve.eta_used == 1e-6);
  CHECK(curve.profile_hash == profile_hash(Profile{p}));
}

TEST_CASE("mass, partial mass and degenerate intervals") {
  const auto p = VarianceProfile::constant(2);
  const auto grid = uniform_grid(-3.0, 3.0, 121);
  const auto curve = extract_density(p, grid);
  CHECK(integrate_density(curve, -3.0, 3.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(integrate_density(curve, -1.0, 1.0) - 0.6089977810442294) < 1e-5);
  CHECK(std::abs(integrate_density(curve, -1.69, -1.49) - 0.03849793404315069) < 1e-6);
  CHECK(integrate_density(curve, 0.5, 0.5) == 0.0);
  const auto fine = uniform_grid(-3.0, 3.0, 601);
  CHECK(std::abs(trapezoid_mass(extract_density(p, fine)) - 1.0) < 1e-3);
  CHECK(kind_of([&] { integrate_density(curve, -4.0, 0.0); }) == ErrorKind::OutOfRange);
}

TEST_CASE("bulk detection") {
  const auto p = VarianceProfile::constant(1);
  const auto grid = uniform_grid(-3.0, 3.0, 601);
  const auto curve = extract_density(p, grid);
  auto bulk = detect_bulk(curve, 0.1);
  REQUIRE(bulk.size() == 1);
  CHECK(std::abs(bulk[0].lo + 1.8987405889052948) <= 0.01);
  CHECK(std::abs(bulk[0].hi - 1.8987405889052948) <= 0.01);
  CHECK(detect_bulk(curve, 1.0).empty());
  bulk = detect_bulk(curve, 1e-9);
  REQUIRE(bulk.size() == 1);
  CHECK(std::abs(bulk[0].lo + 2.0) <= 0.01);
  CHECK(std::abs(bulk[0].hi - 2.0) <= 0.01);
}

TEST_CASE("block and expanded full profiles agree") {
  Eigen::Matrix3d c;
  c << 1.0, 0.3, 0.6, 0.3, 0.5, 0.2, 0.6, 0.2, 0.9;
  const auto block = BlockProfile::from_parts(Eigen::Vector3d(0.25, 0.25, 0.5), c);
  const auto full = block.expand(40);
  for (cd z : {cd(0.1, 0.5), cd(-1.2, 0.05), cd(0.8, 0.01)}) {
    const auto a = solve_qve(block, SpectralPoint::make(z.real(), z.imag()));
    const auto b = solve_qve(full, SpectralPoint::make(z.real(), z.imag()));
    CHECK(std::abs(a.m - b.m) <= 1e-9);
  }
  const Profile reduced = reduce_profile(full);
  REQUIRE(std::holds_alternative<BlockProfile>(reduced));
  CHECK(std::get<BlockProfile>(reduced).d() == 3);
  CHECK(std::get<BlockProfile>(reduce_profile(VarianceProfile::constant(500))).d() == 1);
}

TEST_CASE("density with multiple threads is identical") {
  const auto p = random_profile(12, 0.4, 3);
  const auto grid = uniform_grid(-2.5, 2.5, 41);
  DensityOptions one, four;
  four.threads = 4;
  CHECK(extract_density(p, grid, one).values == extract_density(p, grid, four).values);
}
