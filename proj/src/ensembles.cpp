#include "speclaw/ensembles.hpp"

#include <cmath>
#include <limits>

#include "speclaw/errors.hpp"
#include "speclaw/io.hpp"

namespace speclaw {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename Spec>
std::string provenance_of(const Spec& spec) {
  return ensemble_to_json(EnsembleSpec{spec}).dump();
}

}  // namespace

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t i, std::uint64_t j, Stream stream) {
  std::uint64_t h = mix64(seed + kGolden * (static_cast<std::uint64_t>(stream) + 1));
  h = mix64(h ^ (i + kGolden));
  h = mix64(h ^ (j + 2 * kGolden));
  return h;
}

double counter_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j, Stream stream) {
  return static_cast<double>(counter_bits(seed, i, j, stream) >> 11) * 0x1.0p-53;
}

EntryLaw EntryLaw::rademacher() { return {Kind::Rademacher, 1.0, 0.5}; }

EntryLaw EntryLaw::uniform_bounded() { return {Kind::UniformBounded, std::sqrt(3.0), 0.5}; }

EntryLaw EntryLaw::scaled_bernoulli_centered(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "Bernoulli parameter must lie in (0, 1)");
  }
  const double sd = std::sqrt(q * (1.0 - q));
  return {Kind::ScaledBernoulliCentered, std::max(q, 1.0 - q) / sd, q};
}

double EntryLaw::transform(double u) const {
  switch (kind) {
    case Kind::Rademacher:
      return u < 0.5 ? -1.0 : 1.0;
    case Kind::UniformBounded:
      return std::sqrt(3.0) * (2.0 * u - 1.0);
    case Kind::ScaledBernoulliCentered: {
      const double b = u < q ? 1.0 : 0.0;
      return (b - q) / std::sqrt(q * (1.0 - q));
    }
  }
  return 0.0;
}

void EntryLaw::validate() const {
  double support = 1.0;
  switch (kind) {
    case Kind::Rademacher: support = 1.0; break;
    case Kind::UniformBounded: support = std::sqrt(3.0); break;
    case Kind::ScaledBernoulliCentered:
      if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::InvalidSpec, "Bernoulli parameter must lie in (0, 1)");
      support = std::max(q, 1.0 - q) / std::sqrt(q * (1.0 - q));
      break;
  }
  if (!std::isfinite(bound) || bound < support * (1.0 - 1e-12)) {
    throw Error(ErrorKind::InvalidSpec, "entry bound K is smaller than the support of the law");
  }
}

std::string to_string(EntryLaw::Kind kind) {
  switch (kind) {
    case EntryLaw::Kind::Rademacher: return "rademacher";
    case EntryLaw::Kind::UniformBounded: return "uniform_bounded";
    case EntryLaw::Kind::ScaledBernoulliCentered: return "scaled_bernoulli_centered";
  }
  return "unknown";
}

EntryLaw::Kind entry_law_kind(const std::string& name) {
  if (name == "rademacher") return EntryLaw::Kind::Rademacher;
  if (name == "uniform_bounded") return EntryLaw::Kind::UniformBounded;
  if (name == "scaled_bernoulli_centered") return EntryLaw::Kind::ScaledBernoulliCentered;
  throw Error(ErrorKind::InvalidSpec, "unknown entry law '" + name + "'");
}

void WignerSpec::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "matrix size must be positive");
  if (profile.n() != n) throw Error(ErrorKind::InvalidSpec, "profile size does not match n");
  law.validate();
}

void SparseSpec::validate() const {
  base.validate();
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidSpec, "sparsity p must lie in (0, 1]");
}

int SbmSpec::n() const {
  long total = 0;
  for (int s : sizes) total += s;
  return static_cast<int>(total);
}

double SbmSpec::p_max() const { return probs.size() == 0 ? 0.0 : probs.maxCoeff(); }

double SbmSpec::sigma2() const {
  const double p = p_max();
  return p * (1.0 - p);
}

std::vector<int> SbmSpec::labels() const {
  std::vector<int> label;
  label.reserve(static_cast<std::size_t>(n()));
  for (int k = 0; k < d(); ++k) label.insert(label.end(), sizes[static_cast<std::size_t>(k)], k);
  return label;
}

std::vector<std::string> SbmSpec::warnings() const {
  std::vector<std::string> out;
  const double nn = n();
  if (nn > 1 && d() >= nn / std::log(nn)) {
    out.push_back("number of blocks d >= n / log n: unbounded-blocks regime");
  }
  return out;
}

void SbmSpec::validate() const {
  if (sizes.empty()) throw Error(ErrorKind::InvalidSpec, "SBM needs at least one block");
  for (int s : sizes) {
    if (s < 1) throw Error(ErrorKind::InvalidSpec, "SBM block sizes must be positive");
  }
  const auto d_ = static_cast<Eigen::Index>(sizes.size());
  if (probs.rows() != d_ || probs.cols() != d_) {
    throw Error(ErrorKind::InvalidSpec, "SBM probabilities must be a d x d matrix");
  }
  for (Eigen::Index l = 0; l < d_; ++l) {
    for (Eigen::Index k = 0; k < d_; ++k) {
      const double p = probs(k, l);
      if (!std::isfinite(p) || p < 0.0 || p >= 1.0) {
        throw Error(ErrorKind::InvalidSpec, "SBM probabilities must lie in [0, 1)");
      }
      if (p != probs(l, k)) throw Error(ErrorKind::InvalidSpec, "SBM probabilities must be symmetric");
    }
  }
}

int ensemble_size(const EnsembleSpec& spec) {
  struct {
    int operator()(const WignerSpec& s) const { return s.n; }
    int operator()(const SparseSpec& s) const { return s.base.n; }
    int operator()(const SbmSpec& s) const { return s.n(); }
  } visitor;
  return std::visit(visitor, spec);
}

std::uint64_t ensemble_seed(const EnsembleSpec& spec) {
  struct {
    std::uint64_t operator()(const WignerSpec& s) const { return s.seed; }
    std::uint64_t operator()(const SparseSpec& s) const { return s.base.seed; }
    std::uint64_t operator()(const SbmSpec& s) const { return s.seed; }
  } visitor;
  return std::visit(visitor, spec);
}

EnsembleSpec with_seed(EnsembleSpec spec, std::uint64_t seed) {
  struct {
    std::uint64_t seed;
    void operator()(WignerSpec& s) const { s.seed = seed; }
    void operator()(SparseSpec& s) const { s.base.seed = seed; }
    void operator()(SbmSpec& s) const { s.seed = seed; }
  } visitor{seed};
  std::visit(visitor, spec);
  return spec;
}

double effective_p(const EnsembleSpec& spec) {
  struct {
    double operator()(const WignerSpec&) const { return 1.0; }
    double operator()(const SparseSpec& s) const { return s.p; }
    double operator()(const SbmSpec& s) const { return s.p_max(); }
  } visitor;
  return std::visit(visitor, spec);
}

double entry_bound(const EnsembleSpec& spec) {
  struct {
    double operator()(const WignerSpec& s) const { return s.law.bound; }
    double operator()(const SparseSpec& s) const { return s.base.law.bound; }
    double operator()(const SbmSpec&) const { return 1.0; }
  } visitor;
  return std::visit(visitor, spec);
}

std::string to_string(ScalingKind kind) {
  switch (kind) {
    case ScalingKind::None: return "none";
    case ScalingKind::InvSqrtN: return "inv_sqrt_n";
    case ScalingKind::InvSqrtNP: return "inv_sqrt_np";
    case ScalingKind::CenteredSbm: return "centered_sbm";
  }
  return "unknown";
}

namespace {

SampledMatrix sample_masked(const WignerSpec& base, double p, ScalingKind kind,
                            std::string provenance) {
  const int n = base.n;
  const double factor = 1.0 / std::sqrt(static_cast<double>(n) * p);
  const auto& s = base.profile.entries();
  SampledMatrix out{n, Eigen::MatrixXd(n, n), {kind, factor}, std::move(provenance)};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      double value = 0.0;
      if (p >= 1.0 || counter_uniform(base.seed, i, j, Stream::Mask) < p) {
        const double xi = base.law.transform(counter_uniform(base.seed, i, j, Stream::Entry));
        value = xi * std::sqrt(s(i, j)) * factor;
      }
      out.data(i, j) = value;
      out.data(j, i) = value;
    }
  }
  return out;
}

}  // namespace

SampledMatrix sample_wigner(const WignerSpec& spec) {
  spec.validate();
  return sample_masked(spec, 1.0, ScalingKind::InvSqrtN, provenance_of(spec));
}

SampledMatrix sample_sparse(const SparseSpec& spec) {
  spec.validate();
  return sample_masked(spec.base, spec.p, ScalingKind::InvSqrtNP, provenance_of(spec));
}

SampledMatrix sample_sbm(const SbmSpec& spec) {
  spec.validate();
  const int n = spec.n();
  const auto label = spec.labels();
  SampledMatrix out{n, Eigen::MatrixXd::Zero(n, n), {ScalingKind::None, 1.0}, provenance_of(spec)};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double p = spec.probs(label[i], label[j]);
      if (p > 0.0 && counter_uniform(spec.seed, i, j, Stream::Edge) < p) {
        out.data(i, j) = 1.0;
        out.data(j, i) = 1.0;
      }
    }
  }
  return out;
}

SampledMatrix center_and_scale_sbm(const SampledMatrix& adj, const SbmSpec& spec) {
  spec.validate();
  if (adj.n != spec.n() || adj.scaling.kind != ScalingKind::None) {
    throw Error(ErrorKind::InvalidSpec, "matrix is not a raw adjacency of this SBM");
  }
  const double sigma2 = spec.sigma2();
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance, "SBM has zero variance: every p_kl is 0");
  }
  const int n = adj.n;
  const double factor = 1.0 / (std::sqrt(static_cast<double>(n)) * std::sqrt(sigma2));
  const auto label = spec.labels();
  SampledMatrix out{n, Eigen::MatrixXd(n, n), {ScalingKind::CenteredSbm, factor}, adj.provenance};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out.data(i, j) = (adj.data(i, j) - spec.probs(label[i], label[j])) * factor;
    }
  }
  return out;
}

SampledMatrix sample_normalized(const EnsembleSpec& spec) {
  struct {
    SampledMatrix operator()(const WignerSpec& s) const { return sample_wigner(s); }
    SampledMatrix operator()(const SparseSpec& s) const { return sample_sparse(s); }
    SampledMatrix operator()(const SbmSpec& s) const { return center_and_scale_sbm(sample_sbm(s), s); }
  } visitor;
  return std::visit(visitor, spec);
}

Profile effective_profile(const EnsembleSpec& spec) {
  if (const auto* w = std::get_if<WignerSpec>(&spec)) {
    w->validate();
    return w->profile;
  }
  if (const auto* sp = std::get_if<SparseSpec>(&spec)) {
    sp->validate();
    return sp->base.profile;
  }
  const auto& sbm = std::get<SbmSpec>(spec);
  sbm.validate();
  const double sigma2 = sbm.sigma2();
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorKind::DegenerateVariance, "SBM has zero variance: every p_kl is 0");
  }
  const int d = sbm.d();
  const double n = sbm.n();
  Eigen::VectorXd weights(d);
  Eigen::MatrixXd coeffs(d, d);
  for (int k = 0; k < d; ++k) {
    weights[k] = sbm.sizes[static_cast<std::size_t>(k)] / n;
    for (int l = 0; l < d; ++l) {
      const double p = sbm.probs(k, l);
      coeffs(k, l) = p * (1.0 - p) / sigma2;
    }
  }
  weights /= weights.sum();
  try {
    return BlockProfile::from_parts(std::move(weights), std::move(coeffs));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidSpec,
                std::string("SBM does not give a valid reduced profile: ") + e.what(), e.detail());
  }
}

}  // namespace speclaw
