#include "speclaw/qve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <optional>
#include <numeric>
#include <sstream>
#include <iomanip>

#include "speclaw/errors.hpp"
#include "speclaw/parallel.hpp"

namespace speclaw {

namespace {

std::string detail_json(std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream os;
  os << std::setprecision(17) << '{';
  bool first = true;
  for (const auto& [key, value] : fields) {
    if (!first) os << ',';
    first = false;
    os << '"' << key << "\":" << value;
  }
  os << '}';
  return os.str();
}

// FNV-1a over the raw bytes of a sequence of doubles.
class Fnv1a {
 public:
  void add(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    add(&v, sizeof v);
  }
  void add(std::int64_t v) { add(&v, sizeof v); }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << state_;
    return os.str();
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// (S g) for either profile form, plus the averaging weights of m.
struct Operator {
  const Profile& profile;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& g) const {
    if (const auto* full = std::get_if<VarianceProfile>(&profile)) {
      const auto& s = full->entries();
      const double inv_n = 1.0 / static_cast<double>(full->n());
      Eigen::VectorXd re = s * g.real();
      Eigen::VectorXd im = s * g.imag();
      Eigen::VectorXcd out(g.size());
      out.real() = re * inv_n;
      out.imag() = im * inv_n;
      return out;
    }
    const auto& block = std::get<BlockProfile>(profile);
    Eigen::VectorXcd weighted = block.weights().cast<complex>().cwiseProduct(g);
    Eigen::VectorXd re = block.coeffs() * weighted.real();
    Eigen::VectorXd im = block.coeffs() * weighted.imag();
    Eigen::VectorXcd out(g.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }

  // Dense matrix of the linear map g -> S g.
  Eigen::MatrixXd matrix() const {
    if (const auto* full = std::get_if<VarianceProfile>(&profile)) {
      return full->entries() / static_cast<double>(full->n());
    }
    const auto& block = std::get<BlockProfile>(profile);
    return block.coeffs() * block.weights().asDiagonal();
  }

  complex average(const Eigen::VectorXcd& g) const {
    if (const auto* block = std::get_if<BlockProfile>(&profile)) {
      return (block->weights().cast<complex>().cwiseProduct(g)).sum();
    }
    return g.mean();
  }
};

double sup_defect(const Eigen::VectorXcd& g, const Eigen::VectorXcd& denom) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    worst = std::max(worst, std::abs(1.0 / g[k] + denom[k]));
  }
  return worst;
}

// Newton on g (z + S g) + 1 = 0 with backtracking that keeps g in the upper
// half plane. Used once the fixed point stalls, which happens close to the
// spectral edges where its contraction rate tends to one as eta shrinks.
std::optional<std::pair<Eigen::VectorXcd, int>> newton_polish(const Operator& op, complex z,
                                                              Eigen::VectorXcd g, double threshold) {
  const Eigen::MatrixXcd s = op.matrix().cast<complex>();
  Eigen::VectorXcd denom = s * g;
  denom.array() += z;
  double defect = sup_defect(g, denom);
  for (int it = 1; it <= 60; ++it) {
    const Eigen::VectorXcd f = g.cwiseProduct(denom).array() + 1.0;
    Eigen::MatrixXcd jac = g.asDiagonal() * s;
    jac.diagonal() += denom;
    const Eigen::VectorXcd step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) return std::nullopt;
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 1024.0; t *= 0.5) {
      Eigen::VectorXcd trial = g + t * step;
      if (!(trial.imag().array() > 0.0).all()) continue;
      Eigen::VectorXcd trial_denom = s * trial;
      trial_denom.array() += z;
      const double trial_defect = sup_defect(trial, trial_denom);
      if (trial_defect < defect) {
        g = std::move(trial);
        denom = std::move(trial_denom);
        defect = trial_defect;
        accepted = true;
        break;
      }
    }
    if (defect <= threshold) return std::pair{g, it};
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

constexpr int kNewtonAfter = 500;
constexpr Eigen::Index kNewtonMaxSize = 1024;

void check_options(const SolverOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1 || !(opts.omega > 0.0 && opts.omega <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "solver options need tol > 0, max_iter >= 1 and omega in (0, 1]");
  }
}

}  // namespace

SpectralPoint SpectralPoint::make(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im) || !(im > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "spectral point must lie in the upper half plane",
                detail_json({{"re", re}, {"im", im}}));
  }
  return {re, im};
}

VarianceProfile VarianceProfile::from_entries(Eigen::MatrixXd entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw Error(ErrorKind::InvalidProfile, "variance profile must be a nonempty square matrix");
  }
  const Eigen::Index n = entries.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = entries(i, j);
      if (!std::isfinite(v) || !(v > 0.0) || v > 1.0) {
        throw Error(ErrorKind::InvalidProfile, "variance profile entries must lie in (0, 1]",
                    detail_json({{"row", double(i)}, {"col", double(j)}, {"value", v}}));
      }
      if (v != entries(j, i)) {
        throw Error(ErrorKind::InvalidProfile, "variance profile must be symmetric",
                    detail_json({{"row", double(i)}, {"col", double(j)}}));
      }
    }
  }
  const double c = entries.minCoeff();
  return VarianceProfile(std::move(entries), c);
}

VarianceProfile VarianceProfile::constant(int n, double value) {
  if (n < 1) throw Error(ErrorKind::InvalidProfile, "profile size must be positive");
  return from_entries(Eigen::MatrixXd::Constant(n, n, value));
}

bool VarianceProfile::is_constant() const {
  return (entries_.array() == entries_(0, 0)).all();
}

std::string VarianceProfile::hash() const {
  Fnv1a h;
  h.add(std::int64_t{0});
  h.add(std::int64_t{n()});
  for (Eigen::Index j = 0; j < entries_.cols(); ++j)
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) h.add(entries_(i, j));
  return h.hex();
}

BlockProfile BlockProfile::from_parts(Eigen::VectorXd weights, Eigen::MatrixXd coeffs) {
  const Eigen::Index d = weights.size();
  if (d == 0 || coeffs.rows() != d || coeffs.cols() != d) {
    throw Error(ErrorKind::InvalidProfile, "block profile needs d weights and a d x d coefficient matrix");
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!std::isfinite(weights[k]) || !(weights[k] > 0.0)) {
      throw Error(ErrorKind::InvalidProfile, "block weights must be positive",
                  detail_json({{"index", double(k)}, {"value", weights[k]}}));
    }
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidProfile, "block weights must sum to one",
                detail_json({{"sum", weights.sum()}}));
  }
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double v = coeffs(k, l);
      if (!std::isfinite(v) || !(v > 0.0) || v > 1.0) {
        throw Error(ErrorKind::InvalidProfile, "block coefficients must lie in (0, 1]",
                    detail_json({{"row", double(k)}, {"col", double(l)}, {"value", v}}));
      }
      if (v != coeffs(l, k)) {
        throw Error(ErrorKind::InvalidProfile, "block coefficients must be symmetric",
                    detail_json({{"row", double(k)}, {"col", double(l)}}));
      }
    }
  }
  return BlockProfile(std::move(weights), std::move(coeffs));
}

std::string BlockProfile::hash() const {
  Fnv1a h;
  h.add(std::int64_t{1});
  h.add(std::int64_t{d()});
  for (Eigen::Index k = 0; k < weights_.size(); ++k) h.add(weights_[k]);
  for (Eigen::Index j = 0; j < coeffs_.cols(); ++j)
    for (Eigen::Index i = 0; i < coeffs_.rows(); ++i) h.add(coeffs_(i, j));
  return h.hex();
}

std::vector<int> BlockProfile::block_sizes(int n) const {
  std::vector<int> sizes(static_cast<std::size_t>(d()));
  int total = 0;
  for (int k = 0; k < d(); ++k) {
    const double exact = weights_[k] * n;
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1.0) {
      throw Error(ErrorKind::InvalidProfile, "block weights do not give integral block sizes",
                  detail_json({{"n", double(n)}, {"block", double(k)}, {"size", exact}}));
    }
    sizes[static_cast<std::size_t>(k)] = static_cast<int>(rounded);
    total += static_cast<int>(rounded);
  }
  if (total != n) throw Error(ErrorKind::InvalidProfile, "block sizes do not add up to n");
  return sizes;
}

VarianceProfile BlockProfile::expand(int n) const {
  const auto sizes = block_sizes(n);
  std::vector<int> label;
  label.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < d(); ++k) label.insert(label.end(), sizes[static_cast<std::size_t>(k)], k);
  Eigen::MatrixXd s(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s(i, j) = coeffs_(label[i], label[j]);
  return VarianceProfile::from_entries(std::move(s));
}

std::string profile_hash(const Profile& profile) {
  return std::visit([](const auto& p) { return p.hash(); }, profile);
}

int profile_size(const Profile& profile) {
  if (const auto* full = std::get_if<VarianceProfile>(&profile)) return full->n();
  return std::get<BlockProfile>(profile).d();
}

Profile reduce_profile(const Profile& profile) {
  const auto* full = std::get_if<VarianceProfile>(&profile);
  if (full == nullptr) return profile;
  const auto& s = full->entries();
  const int n = full->n();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // Columns equal rows by symmetry; columns are contiguous in Eigen storage.
  auto column_less = [&](int a, int b) {
    return std::lexicographical_compare(s.col(a).data(), s.col(a).data() + n, s.col(b).data(),
                                        s.col(b).data() + n);
  };
  std::sort(order.begin(), order.end(), column_less);
  std::vector<int> representatives;
  std::vector<int> counts;
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const int i = order[idx];
    if (!representatives.empty() && s.col(representatives.back()) == s.col(i)) {
      ++counts.back();
    } else {
      representatives.push_back(i);
      counts.push_back(1);
    }
  }
  const auto d = static_cast<Eigen::Index>(representatives.size());
  if (d == n) return profile;
  Eigen::VectorXd weights(d);
  Eigen::MatrixXd coeffs(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    weights[k] = static_cast<double>(counts[static_cast<std::size_t>(k)]) / n;
    for (Eigen::Index l = 0; l < d; ++l) coeffs(k, l) = s(representatives[k], representatives[l]);
  }
  // Renormalize so the weights sum to one to rounding.
  weights /= weights.sum();
  return BlockProfile::from_parts(std::move(weights), std::move(coeffs));
}

double qve_defect(const Profile& profile, const Eigen::VectorXcd& g, complex z) {
  const Operator op{profile};
  Eigen::VectorXcd denom = op.apply(g);
  denom.array() += z;
  return sup_defect(g, denom);
}

QveSolution solve_qve(const Profile& profile, SpectralPoint point, const SolverOptions& opts) {
  const SpectralPoint p = SpectralPoint::make(point.re, point.im);
  const Eigen::VectorXcd initial = Eigen::VectorXcd::Constant(profile_size(profile), -1.0 / p.z());
  return solve_qve(profile, p, opts, initial);
}

QveSolution solve_qve(const Profile& profile, SpectralPoint point, const SolverOptions& opts,
                      const Eigen::VectorXcd& initial) {
  check_options(opts);
  const SpectralPoint p = SpectralPoint::make(point.re, point.im);
  const complex z = p.z();
  if (initial.size() != profile_size(profile)) {
    throw Error(ErrorKind::InvalidArgument, "initial guess has the wrong length");
  }
  if (!(initial.imag().array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "initial guess must lie in the upper half plane");
  }
  const Operator op{profile};
  const double threshold = opts.tol * std::max(1.0, std::abs(z));

  Eigen::VectorXcd g = initial;
  double omega = opts.omega;
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int it = 0; it <= opts.max_iter; ++it) {
    Eigen::VectorXcd denom = op.apply(g);
    denom.array() += z;
    const double defect = sup_defect(g, denom);
    if (defect <= threshold) {
      return QveSolution{p, g, op.average(g), defect, it};
    }
    if (!std::isfinite(defect) || it == opts.max_iter) {
      throw Error(ErrorKind::NonConvergence, "quadratic vector equation did not converge",
                  detail_json({{"x", p.re}, {"eta", p.im}, {"residual", defect},
                               {"iterations", double(it)}}));
    }
    if (it == kNewtonAfter && g.size() <= kNewtonMaxSize) {
      if (auto polished = newton_polish(op, z, g, threshold)) {
        auto& [gn, extra] = *polished;
        Eigen::VectorXcd dn = op.apply(gn);
        dn.array() += z;
        return QveSolution{p, gn, op.average(gn), sup_defect(gn, dn), it + extra};
      }
    }
    if (defect > previous) {
      if (++increases == 2) {
        omega = std::max(0.5 * omega, 1.0 / 1024.0);
        increases = 0;
      }
    } else {
      increases = 0;
    }
    previous = defect;
    g = (1.0 - omega) * g - omega * denom.cwiseInverse();
  }
  throw Error(ErrorKind::NonConvergence, "quadratic vector equation did not converge");
}

QveSolution solve_qve_continuation(const Profile& profile, double x, double eta_start,
                                   double eta_end, int steps, const SolverOptions& opts) {
  if (!(eta_end > 0.0) || !(eta_start >= eta_end) || !std::isfinite(eta_start)) {
    throw Error(ErrorKind::InvalidArgument, "continuation needs eta_start >= eta_end > 0",
                detail_json({{"eta_start", eta_start}, {"eta_end", eta_end}}));
  }
  if (eta_start == eta_end || steps < 1) {
    return solve_qve(profile, SpectralPoint::make(x, eta_end), opts);
  }
  const double log_ratio = std::log(eta_end / eta_start) / steps;
  QveSolution current = solve_qve(profile, SpectralPoint::make(x, eta_start), opts);
  double eta_prev = eta_start;
  for (int k = 1; k <= steps; ++k) {
    const double eta = k == steps ? eta_end : eta_start * std::exp(log_ratio * k);
    QveSolution next;
    try {
      next = solve_qve(profile, SpectralPoint::make(x, eta), opts, current.g);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      throw Error(ErrorKind::NonConvergence,
                  "continuation failed to converge at eta = " + std::to_string(eta),
                  detail_json({{"x", x}, {"eta", eta}, {"step", double(k)}}));
    }
    // Im m(x + i eta) can change by at most a factor eta_prev / eta per step.
    const double bound = 2.0 * (eta_prev / eta) * current.m.imag();
    if (std::abs(next.m.imag() - current.m.imag()) > bound) {
      throw Error(ErrorKind::NonConvergence, "continuation jumped between branches",
                  detail_json({{"x", x}, {"eta", eta}, {"step", double(k)}}));
    }
    current = std::move(next);
    eta_prev = eta;
  }
  return current;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 1 || !std::isfinite(lo) || !std::isfinite(hi) || (count > 1 && !(hi > lo))) {
    throw Error(ErrorKind::InvalidArgument, "grid needs lo < hi and count >= 1");
  }
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double h = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + h * i;
  grid.back() = hi;
  return grid;
}

double density_at(const Profile& profile, double x, const DensityOptions& opts) {
  if (!(opts.eta > 0.0) || !(opts.ratio > 0.0 && opts.ratio < 1.0) || !(opts.eta_start > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "density options need eta > 0 and ratio in (0, 1)");
  }
  const double start = std::max(opts.eta_start, opts.eta);
  const int steps =
      start == opts.eta
          ? 0
          : static_cast<int>(std::ceil(std::log(opts.eta / start) / std::log(opts.ratio) - 1e-9));
  const QveSolution at_eta = solve_qve_continuation(profile, x, start, opts.eta, steps, opts.solver);
  if (!opts.extrapolate) return std::max(0.0, at_eta.m.imag() / std::numbers::pi);
  const QveSolution at_half =
      solve_qve(profile, SpectralPoint::make(x, 0.5 * opts.eta), opts.solver, at_eta.g);
  const double richardson = 2.0 * at_half.m.imag() - at_eta.m.imag();
  return std::max(0.0, richardson / std::numbers::pi);
}

DensityCurve extract_density(const Profile& profile, std::span<const double> grid,
                             const DensityOptions& opts) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "density grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "density grid must be finite and strictly increasing");
    }
  }
  DensityCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.assign(grid.size(), 0.0);
  curve.eta_used = opts.eta;
  curve.profile_hash = profile_hash(profile);
  curve.profile = std::make_shared<const Profile>(profile);
  curve.options = opts;
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    try {
      curve.values[i] = density_at(profile, grid[i], opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      throw Error(ErrorKind::NonConvergence,
                  std::string(e.what()) + " (abscissa " + std::to_string(grid[i]) + ")",
                  detail_json({{"x", grid[i]}, {"eta", opts.eta}}));
    }
  });
  return curve;
}

DensityCurve extract_density(const Profile& profile, std::span<const double> grid, double eta) {
  DensityOptions opts;
  opts.eta = eta;
  return extract_density(profile, grid, opts);
}

double trapezoid_mass(const DensityCurve& curve) {
  double mass = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i) {
    mass += 0.5 * (curve.grid[i] - curve.grid[i - 1]) * (curve.values[i] + curve.values[i - 1]);
  }
  return mass;
}

namespace {

struct Segment {
  double a, b;
  double fa, fm, fb;
  double fq1, fq3;  // values at the quarter points

  double whole() const { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }
  double halves() const { return (b - a) / 12.0 * (fa + 4.0 * fq1 + 2.0 * fm + 4.0 * fq3 + fb); }
  double error() const { return std::abs(halves() - whole()) / 15.0; }
};

}  // namespace

double integrate_density(const DensityCurve& curve, double lo, double hi, double rel_tol) {
  if (curve.grid.empty() || !curve.profile) {
    throw Error(ErrorKind::InvalidArgument, "density curve has no grid or source profile");
  }
  const double span = curve.grid.back() - curve.grid.front();
  const double slack = 1e-12 * std::max(1.0, span);
  if (!(lo <= hi) || lo < curve.grid.front() - slack || hi > curve.grid.back() + slack) {
    throw Error(ErrorKind::OutOfRange, "integration range exceeds the density grid",
                detail_json({{"lo", lo}, {"hi", hi}, {"grid_lo", curve.grid.front()},
                             {"grid_hi", curve.grid.back()}}));
  }
  if (hi == lo) return 0.0;

  const Profile& profile = *curve.profile;
  const DensityOptions& opts = curve.options;
  auto tabulated = [&](double x) -> std::optional<double> {
    auto it = std::lower_bound(curve.grid.begin(), curve.grid.end(), x - slack);
    if (it != curve.grid.end() && std::abs(*it - x) <= slack) {
      return curve.values[static_cast<std::size_t>(it - curve.grid.begin())];
    }
    return std::nullopt;
  };
  auto evaluate = [&](std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), opts.threads, [&](std::size_t i) {
      const auto known = tabulated(xs[i]);
      out[i] = known ? *known : density_at(profile, xs[i], opts);
    });
    return out;
  };

  std::vector<double> nodes{lo};
  for (double x : curve.grid) {
    if (x > lo + slack && x < hi - slack) nodes.push_back(x);
  }
  nodes.push_back(hi);
  std::vector<double> node_values = evaluate(nodes);

  // Pair neighbouring nodes into Simpson panels when the middle node is the
  // exact midpoint (uniform grids); otherwise add a midpoint.
  std::vector<Segment> segments;
  std::vector<double> pending;
  std::vector<std::size_t> need_mid;
  for (std::size_t i = 0; i + 1 < nodes.size();) {
    if (i + 2 < nodes.size() &&
        std::abs(nodes[i + 1] - 0.5 * (nodes[i] + nodes[i + 2])) <= slack) {
      segments.push_back({nodes[i], nodes[i + 2], node_values[i], node_values[i + 1],
                          node_values[i + 2], 0.0, 0.0});
      i += 2;
    } else {
      segments.push_back({nodes[i], nodes[i + 1], node_values[i], 0.0, node_values[i + 1], 0.0, 0.0});
      need_mid.push_back(segments.size() - 1);
      pending.push_back(0.5 * (nodes[i] + nodes[i + 1]));
      i += 1;
    }
  }
  if (!pending.empty()) {
    const auto mids = evaluate(pending);
    for (std::size_t k = 0; k < need_mid.size(); ++k) segments[need_mid[k]].fm = mids[k];
  }
  auto fill_quarters = [&](std::vector<Segment>& segs) {
    std::vector<double> xs;
    xs.reserve(2 * segs.size());
    for (const auto& s : segs) {
      xs.push_back(0.75 * s.a + 0.25 * s.b);
      xs.push_back(0.25 * s.a + 0.75 * s.b);
    }
    const auto vals = evaluate(xs);
    for (std::size_t k = 0; k < segs.size(); ++k) {
      segs[k].fq1 = vals[2 * k];
      segs[k].fq3 = vals[2 * k + 1];
    }
  };
  fill_quarters(segments);

  const double floor = 1e-12;
  const double width = hi - lo;
  double previous = std::numeric_limits<double>::quiet_NaN();
  constexpr int kMaxPasses = 60;
  constexpr std::size_t kMaxSegments = 1u << 20;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    double total = 0.0;
    double error = 0.0;
    for (const auto& s : segments) {
      total += s.halves();
      error += s.error();
    }
    const double scale = rel_tol * std::max(std::abs(total), floor);
    const bool settled = !std::isnan(previous) && std::abs(total - previous) <= scale;
    if (settled && error <= scale) return total;
    previous = total;

    std::vector<Segment> next;
    std::vector<Segment> children;
    next.reserve(segments.size());
    for (const auto& s : segments) {
      if (s.error() > 0.5 * scale * (s.b - s.a) / width) {
        const double m = 0.5 * (s.a + s.b);
        children.push_back({s.a, m, s.fa, s.fq1, s.fm, 0.0, 0.0});
        children.push_back({m, s.b, s.fm, s.fq3, s.fb, 0.0, 0.0});
      } else {
        next.push_back(s);
      }
    }
    if (children.empty()) {
      if (error <= scale) return total;
      // Error is spread thinly over many panels; refine everything once.
      for (const auto& s : next) {
        const double m = 0.5 * (s.a + s.b);
        children.push_back({s.a, m, s.fa, s.fq1, s.fm, 0.0, 0.0});
        children.push_back({m, s.b, s.fm, s.fq3, s.fb, 0.0, 0.0});
      }
      next.clear();
    }
    fill_quarters(children);
    next.insert(next.end(), children.begin(), children.end());
    std::sort(next.begin(), next.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    segments = std::move(next);
    if (segments.size() > kMaxSegments) break;
  }
  throw Error(ErrorKind::NonConvergence, "density quadrature did not settle",
              detail_json({{"lo", lo}, {"hi", hi}}));
}

std::vector<BulkInterval> detect_bulk(const DensityCurve& curve, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "bulk threshold must be positive");
  std::vector<BulkInterval> out;
  std::size_t i = 0;
  const std::size_t n = curve.grid.size();
  while (i < n) {
    if (curve.values[i] < eps) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && curve.values[j + 1] >= eps) ++j;
    if (curve.grid[j] > curve.grid[i]) out.push_back({curve.grid[i], curve.grid[j], eps});
    i = j + 1;
  }
  return out;
}

}  // namespace speclaw
