#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclaw/ensembles.hpp"
#include "speclaw/qve.hpp"
#include "speclaw/spectra.hpp"

namespace speclaw {

struct LocalLawConfig {
  EnsembleSpec ensemble;
  /// Bulk threshold: intervals are placed where the predicted density >= eps.
  double eps = 0.1;
  /// Allowed normalized deviation |N_I - n int_I rho| / (n |I|).
  double delta = 0.05;
  /// C2 in |I| = C2 K^2 log n / (n p_eff).
  double interval_len_factor = 1.0;
  /// Explicit interval length; overrides the C2 formula when set.
  std::optional<double> interval_length;
  int num_intervals = 3;
  int trials = 20;
  std::uint64_t base_seed = 1;
  /// Extra trials on seeds disjoint from the campaign, recorded as a pilot.
  int pilot_trials = 0;
  /// Worker threads for trials (<= 0: SPECLAW_THREADS, then 1).
  int threads = 0;
  /// Tabulation grid for the predicted density.
  double grid_lo = -3.0;
  double grid_hi = 3.0;
  int grid_points = 601;
  double density_eta = 1e-6;

  void validate() const;
  /// Resolved |I|.
  double resolved_interval_length() const;
  /// K^2 log n / (n p_eff): the smallest eta (and, up to C2, interval length)
  /// at which the local statements are expected to hold.
  double eta_floor() const;
};

/// Evenly spaced midpoints inside the longest bulk interval, inset by one
/// interval length from its edges (less when the bulk is too short for that).
/// Throws EmptyBulk when no bulk interval is longer than `length`.
std::vector<double> place_midpoints(const std::vector<BulkInterval>& bulk, int count,
                                    double length);

/// Prediction shared by all trials of one campaign.
struct Prediction {
  Profile profile;  // reduced effective profile
  DensityCurve curve;
  std::vector<BulkInterval> bulk;
};

Prediction predict(const LocalLawConfig& cfg);

struct IntervalRecord {
  double lo = 0.0;
  double hi = 0.0;
  /// n * integral of rho over (lo, hi].
  double predicted = 0.0;
  std::vector<int> observed;      // per trial
  std::vector<double> deviation;  // per trial
};

struct LocalLawReport {
  std::string ensemble_type;
  int n = 0;
  double p_eff = 1.0;
  double k_bound = 1.0;
  /// K^2 log n / n > 0.1: the entry bound is large for this n.
  bool k_bound_flag = false;
  double eps = 0.0;
  double delta = 0.0;
  double interval_length = 0.0;
  std::string profile_hash;
  std::vector<BulkInterval> bulk;
  std::vector<IntervalRecord> intervals;
  int trials = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> trial_max_deviation;
  double max_deviation = 0.0;
  /// Fraction of trials in which every interval deviates by at most delta.
  double pass_fraction = 0.0;
  std::optional<double> pilot_max_deviation;
  int pilot_trials = 0;
};

LocalLawReport verify_local_law(const LocalLawConfig& cfg);

struct StieltjesPoint {
  double x = 0.0;
  double eta = 0.0;
  std::complex<double> predicted;
  std::vector<double> discrepancy;  // per trial
};

struct StieltjesReport {
  std::string ensemble_type;
  int n = 0;
  double eta_floor = 0.0;
  std::vector<StieltjesPoint> points;
  std::vector<double> trial_sup;  // sup over the grid, per trial
  double median_sup = 0.0;
  double max_sup = 0.0;
  int trials = 0;
  std::uint64_t base_seed = 0;
};

/// |s_n(z) - m_n(z)| on z = x + i eta for x at the bulk midpoints and eta in
/// eta_grid. Throws InvalidArgument for eta below the floor (or
/// `eta_floor_override` when given).
StieltjesReport verify_stieltjes_closeness(const LocalLawConfig& cfg,
                                           const std::vector<double>& eta_grid,
                                           std::optional<double> eta_floor_override = {});

struct DelocTrial {
  int bulk_count = 0;
  double max_inf_norm = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

struct DelocReport {
  std::string ensemble_type;
  int n = 0;
  double p_eff = 1.0;
  double k_bound = 1.0;
  std::vector<DelocTrial> trials;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double q90_ratio = 0.0;
  double q99_ratio = 0.0;
  std::uint64_t base_seed = 0;
};

/// Normalized sup-norms ||u_i||_inf sqrt(n p_eff) / (K sqrt(log n)) of the
/// eigenvectors whose eigenvalue lies in one of `bulk` (all of them when
/// `bulk` is empty).
DelocTrial delocalization_record(const SpectrumSummary& s, const std::vector<BulkInterval>& bulk,
                                 double p_eff, double k_bound);
DelocReport verify_delocalization(const LocalLawConfig& cfg);

/// Quantile by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct ProjectionTestSpec {
  int n = 0;
  /// Variances of the coordinates of X (the diagonal of Sigma), in [0, 1].
  Eigen::VectorXd sigma;
  int subspace_dim = 0;
  /// Weights r_j in [0, 1], length subspace_dim.
  Eigen::VectorXd weights;
  std::vector<double> t_grid;
  int trials = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ProjectionTable {
  std::vector<double> t;
  std::vector<double> failure_rate;
  /// K of the sampled vectors: max_i sqrt(sigma_i).
  double k_bound = 1.0;
  /// Mean of the centre sum_j r_j tr(u_j u_j^T Sigma) over the basis.
  double center = 0.0;
  bool monotone = true;
  /// Least-squares fit log(rate) ~ log C - C' t^2 / K^2 over nonzero rates.
  std::optional<double> fit_c;
  std::optional<double> fit_c_prime;
};

ProjectionTable projection_concentration_test(const ProjectionTestSpec& spec);

struct InterlacingResult {
  int trials = 0;
  int n = 0;
  int checks = 0;
  int violations = 0;
  /// Largest observed |N_I(A + B) - N_I(A)| for each rank 0..max_rank.
  std::vector<int> max_shift_by_rank;
};

/// Random symmetric A, random rank-r symmetric B (r = 1 in every trial, plus
/// r up to max_rank), random intervals; checks |N_I(A + B) - N_I(A)| <= r.
/// Throws AssertionFailure with a JSON counterexample on the first violation.
InterlacingResult interlacing_test(int trials, int n, std::uint64_t seed, int max_rank = 5);

/// Largest |N_I(A + B) - N_I(A)| over the given intervals.
int interlacing_shift(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const std::vector<std::pair<double, double>>& intervals);

}  // namespace speclaw
