#include "speclaw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "speclaw/errors.hpp"
#include "speclaw/io.hpp"
#include "speclaw/parallel.hpp"

namespace speclaw {

namespace {

std::string ensemble_type(const EnsembleSpec& spec) {
  if (std::holds_alternative<WignerSpec>(spec)) return "wigner";
  if (std::holds_alternative<SparseSpec>(spec)) return "sparse";
  return "sbm";
}

// Standard normal from two counter-based uniforms (Box-Muller).
double counter_normal(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  const double u1 = counter_uniform(seed, i, 2 * j, Stream::Auxiliary);
  const double u2 = counter_uniform(seed, i, 2 * j + 1, Stream::Auxiliary);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::MatrixXd gaussian_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      g(i, j) = counter_normal(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
  return g;
}

bool in_bulk(double x, const std::vector<BulkInterval>& bulk) {
  return std::any_of(bulk.begin(), bulk.end(),
                     [x](const BulkInterval& b) { return x >= b.lo && x <= b.hi; });
}

}  // namespace

void LocalLawConfig::validate() const {
  std::visit([](const auto& s) { s.validate(); }, ensemble);
  if (!(eps > 0.0)) throw Error(ErrorKind::Config, "eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::Config, "delta must lie in (0, 1)");
  if (!(interval_len_factor > 0.0)) throw Error(ErrorKind::Config, "interval_len_factor must be positive");
  if (interval_length && !(*interval_length > 0.0)) {
    throw Error(ErrorKind::Config, "interval_length must be positive");
  }
  if (num_intervals < 1) throw Error(ErrorKind::Config, "num_intervals must be at least 1");
  if (trials < 1) throw Error(ErrorKind::Config, "trials must be at least 1");
  if (pilot_trials < 0) throw Error(ErrorKind::Config, "pilot_trials must be nonnegative");
  if (grid_points < 3 || !(grid_hi > grid_lo)) throw Error(ErrorKind::Config, "invalid density grid");
  if (!(density_eta > 0.0)) throw Error(ErrorKind::Config, "density_eta must be positive");
}

double LocalLawConfig::eta_floor() const {
  const double n = ensemble_size(ensemble);
  const double k = entry_bound(ensemble);
  return k * k * std::log(n) / (n * effective_p(ensemble));
}

double LocalLawConfig::resolved_interval_length() const {
  return interval_length ? *interval_length : interval_len_factor * eta_floor();
}

std::vector<double> place_midpoints(const std::vector<BulkInterval>& bulk, int count,
                                    double length) {
  if (bulk.empty()) throw Error(ErrorKind::EmptyBulk, "predicted density has no bulk at this eps");
  const auto widest = std::max_element(bulk.begin(), bulk.end(), [](const auto& a, const auto& b) {
    return a.hi - a.lo < b.hi - b.lo;
  });
  const double width = widest->hi - widest->lo;
  if (!(width > length)) {
    throw Error(ErrorKind::EmptyBulk, "bulk is shorter than the requested interval length");
  }
  const double inset = std::min(length, 0.25 * (width - length));
  const double a = widest->lo + 0.5 * length + inset;
  const double b = widest->hi - 0.5 * length - inset;
  std::vector<double> mids(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    mids[static_cast<std::size_t>(i)] = count == 1 ? 0.5 * (a + b) : a + (b - a) * i / (count - 1);
  }
  return mids;
}

Prediction predict(const LocalLawConfig& cfg) {
  cfg.validate();
  Profile profile = reduce_profile(effective_profile(cfg.ensemble));
  DensityOptions opts;
  opts.eta = cfg.density_eta;
  opts.threads = resolve_threads(cfg.threads);
  const auto grid = uniform_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points);
  DensityCurve curve = extract_density(profile, grid, opts);
  auto bulk = detect_bulk(curve, cfg.eps);
  if (bulk.empty()) throw Error(ErrorKind::EmptyBulk, "predicted density has no bulk at this eps");
  return {std::move(profile), std::move(curve), std::move(bulk)};
}

LocalLawReport verify_local_law(const LocalLawConfig& cfg) {
  const Prediction pred = predict(cfg);
  const int n = ensemble_size(cfg.ensemble);
  const double length = cfg.resolved_interval_length();
  const auto mids = place_midpoints(pred.bulk, cfg.num_intervals, length);
  const int threads = resolve_threads(cfg.threads);

  LocalLawReport report;
  report.ensemble_type = ensemble_type(cfg.ensemble);
  report.n = n;
  report.p_eff = effective_p(cfg.ensemble);
  report.k_bound = entry_bound(cfg.ensemble);
  report.k_bound_flag = report.k_bound * report.k_bound * std::log(double(n)) / n > 0.1;
  report.eps = cfg.eps;
  report.delta = cfg.delta;
  report.interval_length = length;
  report.profile_hash = profile_hash(effective_profile(cfg.ensemble));
  report.bulk = pred.bulk;
  report.trials = cfg.trials;
  report.base_seed = cfg.base_seed;
  for (double mid : mids) {
    IntervalRecord rec;
    rec.lo = mid - 0.5 * length;
    rec.hi = mid + 0.5 * length;
    rec.lo = std::max(rec.lo, cfg.grid_lo);
    rec.hi = std::min(rec.hi, cfg.grid_hi);
    rec.predicted = n * integrate_density(pred.curve, rec.lo, rec.hi);
    report.intervals.push_back(std::move(rec));
  }

  auto run_counts = [&](std::uint64_t first_seed, int trials) {
    std::vector<std::vector<int>> counts(static_cast<std::size_t>(trials));
    parallel_for(counts.size(), threads, [&](std::size_t t) {
      const auto m = sample_normalized(with_seed(cfg.ensemble, first_seed + t));
      const auto tri = tridiagonalize(m);
      for (const auto& rec : report.intervals) counts[t].push_back(count_in_interval(tri, rec.lo, rec.hi));
    });
    return counts;
  };
  auto deviation = [&](const IntervalRecord& rec, int observed) {
    return std::abs(observed - rec.predicted) / (n * (rec.hi - rec.lo));
  };

  const auto counts = run_counts(cfg.base_seed, cfg.trials);
  report.trial_max_deviation.assign(static_cast<std::size_t>(cfg.trials), 0.0);
  int passed = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    double worst = 0.0;
    for (std::size_t k = 0; k < report.intervals.size(); ++k) {
      auto& rec = report.intervals[k];
      const double dev = deviation(rec, counts[t][k]);
      rec.observed.push_back(counts[t][k]);
      rec.deviation.push_back(dev);
      worst = std::max(worst, dev);
    }
    report.trial_max_deviation[t] = worst;
    if (worst <= cfg.delta) ++passed;
  }
  report.max_deviation =
      *std::max_element(report.trial_max_deviation.begin(), report.trial_max_deviation.end());
  report.pass_fraction = static_cast<double>(passed) / cfg.trials;

  if (cfg.pilot_trials > 0) {
    // Pilot seeds start far away from the campaign's base_seed + i range.
    const std::uint64_t pilot_seed = cfg.base_seed + (std::uint64_t{1} << 32);
    const auto pilot = run_counts(pilot_seed, cfg.pilot_trials);
    double worst = 0.0;
    for (const auto& row : pilot)
      for (std::size_t k = 0; k < row.size(); ++k) worst = std::max(worst, deviation(report.intervals[k], row[k]));
    report.pilot_max_deviation = worst;
    report.pilot_trials = cfg.pilot_trials;
  }
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

StieltjesReport verify_stieltjes_closeness(const LocalLawConfig& cfg,
                                           const std::vector<double>& eta_grid,
                                           std::optional<double> eta_floor_override) {
  const Prediction pred = predict(cfg);
  const double floor = eta_floor_override.value_or(cfg.eta_floor());
  if (eta_grid.empty()) throw Error(ErrorKind::InvalidArgument, "eta grid is empty");
  for (double eta : eta_grid) {
    if (!(eta >= floor)) {
      throw Error(ErrorKind::InvalidArgument,
                  "eta " + std::to_string(eta) + " is below the floor " + std::to_string(floor));
    }
  }
  const auto xs = place_midpoints(pred.bulk, cfg.num_intervals, cfg.resolved_interval_length());
  const int threads = resolve_threads(cfg.threads);

  StieltjesReport report;
  report.ensemble_type = ensemble_type(cfg.ensemble);
  report.n = ensemble_size(cfg.ensemble);
  report.eta_floor = floor;
  report.trials = cfg.trials;
  report.base_seed = cfg.base_seed;
  for (double eta : eta_grid) {
    for (double x : xs) {
      StieltjesPoint pt;
      pt.x = x;
      pt.eta = eta;
      const auto sol = eta >= 1.0 ? solve_qve(pred.profile, SpectralPoint::make(x, eta))
                                  : solve_qve_continuation(
                                        pred.profile, x, 1.0, eta,
                                        static_cast<int>(std::ceil(std::log(eta) / std::log(0.7))));
      pt.predicted = sol.m;
      report.points.push_back(std::move(pt));
    }
  }
  std::vector<Eigen::VectorXd> spectra(static_cast<std::size_t>(cfg.trials));
  parallel_for(spectra.size(), threads, [&](std::size_t t) {
    const auto m = sample_normalized(with_seed(cfg.ensemble, cfg.base_seed + t));
    spectra[t] = tridiagonal_eigenvalues(tridiagonalize(m));
  });
  report.trial_sup.assign(spectra.size(), 0.0);
  for (std::size_t t = 0; t < spectra.size(); ++t) {
    for (auto& pt : report.points) {
      const auto s = stieltjes_empirical(spectra[t], SpectralPoint::make(pt.x, pt.eta));
      const double disc = std::abs(s - pt.predicted);
      pt.discrepancy.push_back(disc);
      report.trial_sup[t] = std::max(report.trial_sup[t], disc);
    }
  }
  report.median_sup = quantile(report.trial_sup, 0.5);
  report.max_sup = *std::max_element(report.trial_sup.begin(), report.trial_sup.end());
  return report;
}

DelocTrial delocalization_record(const SpectrumSummary& s, const std::vector<BulkInterval>& bulk,
                                 double p_eff, double k_bound) {
  if (!s.eigenvectors) throw Error(ErrorKind::MissingVectors, "spectrum has no eigenvectors");
  const Eigen::VectorXd norms = s.inf_norms ? *s.inf_norms : eigvec_inf_norms(s);
  const double n = s.n();
  const double scale = std::sqrt(n * p_eff) / (k_bound * std::sqrt(std::log(n)));
  DelocTrial trial;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (!bulk.empty() && !in_bulk(s.eigenvalues[i], bulk)) continue;
    const double norm = norms[i];
    ++trial.bulk_count;
    trial.max_inf_norm = std::max(trial.max_inf_norm, norm);
    trial.ratios.push_back(norm * scale);
    trial.max_ratio = std::max(trial.max_ratio, norm * scale);
  }
  return trial;
}

DelocReport verify_delocalization(const LocalLawConfig& cfg) {
  const Prediction pred = predict(cfg);
  const int threads = resolve_threads(cfg.threads);
  DelocReport report;
  report.ensemble_type = ensemble_type(cfg.ensemble);
  report.n = ensemble_size(cfg.ensemble);
  report.p_eff = effective_p(cfg.ensemble);
  report.k_bound = entry_bound(cfg.ensemble);
  report.base_seed = cfg.base_seed;
  double lo = pred.bulk.front().lo;
  double hi = pred.bulk.front().hi;
  for (const auto& b : pred.bulk) {
    lo = std::min(lo, b.lo);
    hi = std::max(hi, b.hi);
  }
  report.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(report.trials.size(), threads, [&](std::size_t t) {
    const auto m = sample_normalized(with_seed(cfg.ensemble, cfg.base_seed + t));
    const auto s = eigen_selected(m.data, lo, hi);
    report.trials[t] = delocalization_record(s, pred.bulk, report.p_eff, report.k_bound);
  });
  std::vector<double> pooled;
  for (const auto& t : report.trials) {
    pooled.insert(pooled.end(), t.ratios.begin(), t.ratios.end());
    report.max_ratio = std::max(report.max_ratio, t.max_ratio);
  }
  if (pooled.empty()) throw Error(ErrorKind::EmptyBulk, "no eigenvalue fell inside the bulk");
  report.median_ratio = quantile(pooled, 0.5);
  report.q90_ratio = quantile(pooled, 0.9);
  report.q99_ratio = quantile(pooled, 0.99);
  return report;
}

void ProjectionTestSpec::validate() const {
  if (n < 1 || subspace_dim < 1 || subspace_dim > n) {
    throw Error(ErrorKind::Config, "projection test needs 1 <= subspace_dim <= n");
  }
  if (sigma.size() != n || weights.size() != subspace_dim) {
    throw Error(ErrorKind::Config, "sigma must have length n and weights length subspace_dim");
  }
  if ((sigma.array() < 0.0).any() || (sigma.array() > 1.0).any()) {
    throw Error(ErrorKind::Config, "variances must lie in [0, 1]");
  }
  if ((weights.array() < 0.0).any() || (weights.array() > 1.0).any()) {
    throw Error(ErrorKind::Config, "weights must lie in [0, 1]");
  }
  if (t_grid.empty() || trials < 1) throw Error(ErrorKind::Config, "empty t grid or no trials");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw Error(ErrorKind::Config, "t values must be positive");
  }
}

ProjectionTable projection_concentration_test(const ProjectionTestSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n;
  const Eigen::Index d = spec.subspace_dim;
  // Orthonormal basis: thin Q of a seeded Gaussian n x d matrix.
  const Eigen::MatrixXd gauss = gaussian_matrix(spec.seed, n, d);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);

  const Eigen::VectorXd sd = spec.sigma.cwiseSqrt();
  // centre = sum_j r_j u_j^T Sigma u_j
  const double center =
      (basis.array().square().matrix().transpose() * spec.sigma).dot(spec.weights);
  ProjectionTable table;
  table.t = spec.t_grid;
  table.k_bound = sd.maxCoeff();
  table.center = center;
  const double k = table.k_bound > 0.0 ? table.k_bound : 1.0;

  std::vector<long> failures(spec.t_grid.size(), 0);
  constexpr Eigen::Index kChunk = 512;
  for (Eigen::Index start = 0; start < spec.trials; start += kChunk) {
    const Eigen::Index cols = std::min<Eigen::Index>(kChunk, spec.trials - start);
    Eigen::MatrixXd x(n, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = counter_uniform(spec.seed, static_cast<std::uint64_t>(start + c),
                                         static_cast<std::uint64_t>(i), Stream::Entry);
        x(i, c) = (u < 0.5 ? -1.0 : 1.0) * sd[i];
      }
    }
    const Eigen::MatrixXd proj = basis.transpose() * x;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double stat = proj.col(c).array().square().matrix().dot(spec.weights);
      const double dev = std::abs(stat - center);
      for (std::size_t i = 0; i < spec.t_grid.size(); ++i) {
        const double t = spec.t_grid[i];
        if (dev >= 2.0 * t * std::sqrt(center) + t * t) ++failures[i];
      }
    }
  }
  for (long f : failures) table.failure_rate.push_back(static_cast<double>(f) / spec.trials);
  std::vector<std::size_t> order(spec.t_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return spec.t_grid[a] < spec.t_grid[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (table.failure_rate[order[i]] > table.failure_rate[order[i - 1]]) table.monotone = false;
  }

  // log(rate) = a - b s with s = t^2 / K^2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    if (table.failure_rate[i] <= 0.0) continue;
    const double s = table.t[i] * table.t[i] / (k * k);
    const double y = std::log(table.failure_rate[i]);
    sx += s;
    sy += y;
    sxx += s * s;
    sxy += s * y;
    ++m;
  }
  if (m >= 2 && m * sxx - sx * sx > 0.0) {
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    table.fit_c = std::exp(intercept);
    table.fit_c_prime = -slope;
  }
  return table;
}

int interlacing_shift(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const std::vector<std::pair<double, double>>& intervals) {
  const auto ta = tridiagonalize(a);
  const auto tab = tridiagonalize(Eigen::MatrixXd(a + b));
  int worst = 0;
  for (const auto& [lo, hi] : intervals) {
    worst = std::max(worst, std::abs(count_in_interval(tab, lo, hi) - count_in_interval(ta, lo, hi)));
  }
  return worst;
}

InterlacingResult interlacing_test(int trials, int n, std::uint64_t seed, int max_rank) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "interlacing test needs n >= 2");
  if (trials < 1 || max_rank < 1) throw Error(ErrorKind::InvalidArgument, "need trials >= 1 and max_rank >= 1");
  InterlacingResult result;
  result.trials = trials;
  result.n = n;
  result.max_shift_by_rank.assign(static_cast<std::size_t>(max_rank + 1), 0);
  constexpr int kIntervals = 8;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(trial);
    Eigen::MatrixXd g = gaussian_matrix(s, n, n);
    const Eigen::MatrixXd a = (g + g.transpose()) / std::sqrt(2.0 * n);
    std::vector<std::pair<double, double>> intervals;
    for (int k = 0; k < kIntervals; ++k) {
      double lo = -3.0 + 6.0 * counter_uniform(s, 1000 + k, 0, Stream::Auxiliary);
      double hi = -3.0 + 6.0 * counter_uniform(s, 1000 + k, 1, Stream::Auxiliary);
      if (lo > hi) std::swap(lo, hi);
      intervals.emplace_back(lo, hi);
    }
    // Rank 1 every trial, plus rank 2..max_rank cycling.
    const int extra_rank = max_rank > 1 ? 2 + trial % (max_rank - 1) : 1;
    const Eigen::MatrixXd v = gaussian_matrix(s + (std::uint64_t{1} << 40), n, extra_rank);
    for (int rank : {1, extra_rank}) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
      for (int r = 0; r < rank; ++r) {
        const double sign = counter_uniform(s, 2000 + r, 0, Stream::Auxiliary) < 0.5 ? -1.0 : 1.0;
        const Eigen::VectorXd col = v.col(r) / std::sqrt(double(n));
        b += sign * col * col.transpose();
      }
      const int shift = interlacing_shift(a, b, intervals);
      ++result.checks;
      auto& slot = result.max_shift_by_rank[static_cast<std::size_t>(rank)];
      slot = std::max(slot, shift);
      if (shift > rank) {
        ++result.violations;
        nlohmann::json dump{{"trial", trial}, {"seed", s}, {"rank", rank}, {"shift", shift},
                            {"a", matrix_to_json(a)}, {"b", matrix_to_json(b)}};
        dump["intervals"] = intervals;
        throw Error(ErrorKind::AssertionFailure, "interlacing bound violated", dump.dump());
      }
      if (rank == extra_rank) break;
    }
  }
  return result;
}

}  // namespace speclaw
