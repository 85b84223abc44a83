#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace speclaw {

using complex = std::complex<double>;

/// A point z = re + i*im of the open upper half plane.
struct SpectralPoint {
  double re = 0.0;
  double im = 1.0;

  /// Throws InvalidArgument unless im > 0 and both parts are finite.
  static SpectralPoint make(double re, double im);
  complex z() const { return {re, im}; }
};

/// Symmetric n x n matrix of entry variances s_ij with c <= s_ij <= 1.
class VarianceProfile {
 public:
  /// Validates symmetry (exact), finiteness and 0 < s_ij <= 1.
  static VarianceProfile from_entries(Eigen::MatrixXd entries);
  static VarianceProfile constant(int n, double value = 1.0);

  int n() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  /// The stored lower bound c (smallest entry).
  double lower_bound() const { return lower_bound_; }
  /// True when every entry equals entries(0, 0).
  bool is_constant() const;
  /// Hex digest of the entries; stable across runs and platforms.
  std::string hash() const;

 private:
  explicit VarianceProfile(Eigen::MatrixXd entries, double lower_bound)
      : entries_(std::move(entries)), lower_bound_(lower_bound) {}
  Eigen::MatrixXd entries_;
  double lower_bound_;
};

/// d-class reduction: class weights alpha (summing to one) and a symmetric
/// coefficient matrix c_kl in (0, 1].
class BlockProfile {
 public:
  static BlockProfile from_parts(Eigen::VectorXd weights, Eigen::MatrixXd coeffs);

  int d() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  double lower_bound() const { return coeffs_.minCoeff(); }
  std::string hash() const;

  /// Block sizes alpha_k * n; throws InvalidProfile if any is not integral.
  std::vector<int> block_sizes(int n) const;
  /// Block-constant full profile with s_ij = c_kl on block (k, l).
  VarianceProfile expand(int n) const;

 private:
  BlockProfile(Eigen::VectorXd weights, Eigen::MatrixXd coeffs)
      : weights_(std::move(weights)), coeffs_(std::move(coeffs)) {}
  Eigen::VectorXd weights_;
  Eigen::MatrixXd coeffs_;
};

using Profile = std::variant<VarianceProfile, BlockProfile>;

std::string profile_hash(const Profile& profile);
/// Number of unknowns of the equation (n or d).
int profile_size(const Profile& profile);

/// Groups identical rows of a full profile. Rows that coincide share the same
/// solution component, so the equation collapses exactly onto the classes.
/// Returns the profile unchanged when every row is distinct.
Profile reduce_profile(const Profile& profile);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  /// Initial damping; halved whenever the defect grows twice in a row.
  double omega = 0.5;
};

struct QveSolution {
  SpectralPoint point;
  Eigen::VectorXcd g;
  complex m;
  double residual = 0.0;
  int iterations = 0;
};

/// Sup-norm defect max_k |1/g_k + z + (S g)_k| of a candidate vector.
double qve_defect(const Profile& profile, const Eigen::VectorXcd& g, complex z);

/// Damped fixed-point solve started from g = -1/z, switching to a Newton
/// polish if the iteration stalls. Convergence is declared
/// once the defect is at most tol * max(1, |z|).
QveSolution solve_qve(const Profile& profile, SpectralPoint point,
                      const SolverOptions& opts = {});
/// Same, warm-started from `initial` (every component must lie in the upper
/// half plane).
QveSolution solve_qve(const Profile& profile, SpectralPoint point,
                      const SolverOptions& opts, const Eigen::VectorXcd& initial);

/// Geometric eta-stepping from eta_start down to eta_end in `steps` solves,
/// each warm-started from the previous one. eta_start == eta_end is a plain
/// solve_qve at that point.
QveSolution solve_qve_continuation(const Profile& profile, double x,
                                   double eta_start, double eta_end, int steps,
                                   const SolverOptions& opts = {});

struct DensityOptions {
  double eta = 1e-6;
  double eta_start = 1.0;
  /// Geometric ratio between successive continuation heights.
  double ratio = 0.7;
  /// Combine the solutions at eta and eta/2 to cancel the O(eta) term of
  /// Im m(x + i eta). Without it the tails outside the support decay only
  /// like eta / dist(x, supp)^2.
  bool extrapolate = true;
  SolverOptions solver;
  int threads = 1;
};

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> values;
  double eta_used = 0.0;
  std::string profile_hash;
  /// Source profile and options, kept for quadrature refinement.
  std::shared_ptr<const Profile> profile;
  DensityOptions options;
};

std::vector<double> uniform_grid(double lo, double hi, int count);

/// rho(x) ~ Im m(x + i eta) / pi by continuation, for one abscissa.
double density_at(const Profile& profile, double x, const DensityOptions& opts = {});

DensityCurve extract_density(const Profile& profile, std::span<const double> grid,
                             const DensityOptions& opts = {});
DensityCurve extract_density(const Profile& profile, std::span<const double> grid,
                             double eta);

/// Adaptive Simpson quadrature of the density over [lo, hi], seeded with the
/// tabulated values and refined (re-solving the equation at new abscissas)
/// until two successive passes agree to rel_tol.
double integrate_density(const DensityCurve& curve, double lo, double hi,
                         double rel_tol = 1e-6);

/// Trapezoid rule over the tabulated values only.
double trapezoid_mass(const DensityCurve& curve);

struct BulkInterval {
  double lo = 0.0;
  double hi = 0.0;
  double min_density = 0.0;
};

/// Maximal runs of grid points whose tabulated density is >= eps.
std::vector<BulkInterval> detect_bulk(const DensityCurve& curve, double eps);

}  // namespace speclaw
