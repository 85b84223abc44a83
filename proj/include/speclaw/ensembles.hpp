#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "speclaw/qve.hpp"

namespace speclaw {

/// Stream tags that keep the per-entry draws of different roles independent.
enum class Stream : std::uint64_t { Entry = 0, Mask = 1, Edge = 2, Auxiliary = 3 };

/// Counter-based draw: a fixed function of (seed, i, j, stream), so a matrix
/// does not depend on traversal order or thread count.
std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t i, std::uint64_t j, Stream stream);
/// Uniform in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j, Stream stream);

/// Bounded, centred, unit-variance entry distribution.
struct EntryLaw {
  enum class Kind { Rademacher, UniformBounded, ScaledBernoulliCentered };

  Kind kind = Kind::Rademacher;
  /// Almost-sure bound K on |xi|.
  double bound = 1.0;
  /// Success probability of the Bernoulli law (ignored otherwise).
  double q = 0.5;

  static EntryLaw rademacher();
  /// Uniform on [-sqrt(3), sqrt(3)].
  static EntryLaw uniform_bounded();
  /// (b - q) / sqrt(q (1 - q)) with b ~ Bernoulli(q).
  static EntryLaw scaled_bernoulli_centered(double q);

  /// Maps a uniform draw in [0, 1) to a sample.
  double transform(double u) const;
  void validate() const;
};

std::string to_string(EntryLaw::Kind kind);
EntryLaw::Kind entry_law_kind(const std::string& name);

struct WignerSpec {
  int n = 0;
  VarianceProfile profile = VarianceProfile::constant(1);
  EntryLaw law;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SparseSpec {
  WignerSpec base;
  double p = 1.0;

  void validate() const;
};

struct SbmSpec {
  std::vector<int> sizes;
  Eigen::MatrixXd probs;
  std::uint64_t seed = 0;

  int d() const { return static_cast<int>(sizes.size()); }
  int n() const;
  /// p = max p_kl.
  double p_max() const;
  /// sigma^2 = p (1 - p).
  double sigma2() const;
  /// Block index of every vertex; blocks are contiguous ranges in order.
  std::vector<int> labels() const;
  /// Non-fatal diagnostics, e.g. the unbounded-blocks regime d >= n / log n.
  std::vector<std::string> warnings() const;
  void validate() const;
};

using EnsembleSpec = std::variant<WignerSpec, SparseSpec, SbmSpec>;

int ensemble_size(const EnsembleSpec& spec);
std::uint64_t ensemble_seed(const EnsembleSpec& spec);
EnsembleSpec with_seed(EnsembleSpec spec, std::uint64_t seed);
/// Sparsity level of the normalization: 1 for dense, p for sparse, max p_kl
/// for SBM.
double effective_p(const EnsembleSpec& spec);
/// Entry bound K entering the interval-length and delocalization yardsticks
/// (1 for SBM adjacency entries).
double entry_bound(const EnsembleSpec& spec);

enum class ScalingKind { None, InvSqrtN, InvSqrtNP, CenteredSbm };
std::string to_string(ScalingKind kind);

struct Scaling {
  ScalingKind kind = ScalingKind::None;
  /// Multiplier applied to the raw entries (after centering, for SBM).
  double factor = 1.0;
};

struct SampledMatrix {
  int n = 0;
  Eigen::MatrixXd data;
  Scaling scaling;
  /// JSON text of the generating ensemble, seed included.
  std::string provenance;
};

/// W = M / sqrt(n), entries xi_ij * sqrt(s_ij), diagonal included.
SampledMatrix sample_wigner(const WignerSpec& spec);
/// W = (delta_ij xi_ij sqrt(s_ij)) / sqrt(n p) with Bernoulli(p) masks drawn
/// from a stream independent of the entries.
SampledMatrix sample_sparse(const SparseSpec& spec);
/// Raw 0/1 adjacency with zero diagonal.
SampledMatrix sample_sbm(const SbmSpec& spec);
/// (A - E A~) / (sqrt(n) sigma) where E A~ carries p_kl on every entry of
/// block (k, l), diagonal included.
SampledMatrix center_and_scale_sbm(const SampledMatrix& adj, const SbmSpec& spec);

/// Sample and normalize so the spectrum lives on the scale of the equation.
SampledMatrix sample_normalized(const EnsembleSpec& spec);

/// Variance profile the equation is solved with: the stored profile for dense
/// and sparse ensembles, alpha_k = N_k / n and c_kl = sigma_kl^2 / sigma^2
/// for SBM.
Profile effective_profile(const EnsembleSpec& spec);

}  // namespace speclaw
