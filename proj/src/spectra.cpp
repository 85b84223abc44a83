#include "speclaw/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Householder>
#include <Eigen/LU>

#include "speclaw/errors.hpp"

namespace speclaw {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Reflectors = Eigen::HouseholderSequence<Eigen::MatrixXd, Eigen::VectorXd>;

Reflectors sequence_of(const TridiagonalForm& t) {
  if (!t.has_q()) {
    throw Error(ErrorKind::MissingVectors, "tridiagonal form was computed without reflectors");
  }
  const auto n = t.n();
  return Reflectors(*t.reflectors, *t.coeffs).setLength(std::max(0, n - 1)).setShift(1);
}

void check_square(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, "matrix must be square");
  if (!a.allFinite()) throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
}

}  // namespace

Eigen::MatrixXd TridiagonalForm::q() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(n(), n());
  apply_q(out);
  return out;
}

void TridiagonalForm::apply_q(Eigen::MatrixXd& z) const {
  if (n() < 3) {
    if (!has_q()) sequence_of(*this);  // throws
    return;  // Q is the identity for n <= 2
  }
  sequence_of(*this).applyThisOnTheLeft(z);
}

Eigen::MatrixXd TridiagonalForm::dense() const {
  const int size = n();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
  t.diagonal() = diag;
  if (size > 1) {
    t.diagonal(1) = offdiag;
    t.diagonal(-1) = offdiag;
  }
  return t;
}

TridiagonalForm tridiagonalize(const Eigen::MatrixXd& input, bool accumulate_q) {
  check_square(input);
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = input;
  TridiagonalForm out;
  out.diag.resize(n);
  out.offdiag.resize(std::max<Eigen::Index>(n - 1, 0));
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 1, 0));

  // Reduce column i with H = I - tau v v^T, v(0) = 1, acting on rows i+1..n-1,
  // then update the trailing block as A <- H A H using its lower triangle only.
  Eigen::VectorXd v;
  Eigen::VectorXd w;
  for (Eigen::Index i = 0; i + 2 < n; ++i) {
    const Eigen::Index r = n - i - 1;
    auto x = a.col(i).tail(r);
    const double x0 = x[0];
    const double tail_sq = x.tail(r - 1).squaredNorm();
    double tau = 0.0;
    double beta = x0;
    if (tail_sq > 0.0) {
      beta = -std::copysign(std::sqrt(x0 * x0 + tail_sq), x0);
      tau = (beta - x0) / beta;
      x.tail(r - 1) /= (x0 - beta);
    }
    out.diag[i] = a(i, i);
    out.offdiag[i] = beta;
    coeffs[i] = tau;
    if (tau == 0.0) continue;

    v.resize(r);
    v[0] = 1.0;
    v.tail(r - 1) = x.tail(r - 1);
    auto trailing = a.bottomRightCorner(r, r);
    w.noalias() = tau * (trailing.selfadjointView<Eigen::Lower>() * v);
    w += (-0.5 * tau * w.dot(v)) * v;
    trailing.selfadjointView<Eigen::Lower>().rankUpdate(v, w, -1.0);
  }
  if (n >= 2) {
    out.diag[n - 2] = a(n - 2, n - 2);
    out.offdiag[n - 2] = a(n - 1, n - 2);
  }
  if (n >= 1) out.diag[n - 1] = a(n - 1, n - 1);

  if (accumulate_q) {
    out.reflectors = std::move(a);
    out.coeffs = std::move(coeffs);
  }
  return out;
}

TridiagonalForm tridiagonalize(const SampledMatrix& m, bool accumulate_q) {
  return tridiagonalize(m.data, accumulate_q);
}

int count_at_most(const TridiagonalForm& t, double x) {
  const Eigen::Index n = t.diag.size();
  if (n == 0) return 0;
  double emax2 = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) emax2 = std::max(emax2, t.offdiag[i] * t.offdiag[i]);
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, emax2);
  int count = 0;
  double q = t.diag[0] - x;
  for (Eigen::Index i = 0;;) {
    if (std::abs(q) <= pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    if (++i == n) break;
    const double e = t.offdiag[i - 1];
    q = (t.diag[i] - x) - e * e / q;
  }
  return count;
}

int count_in_interval(const TridiagonalForm& t, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw Error(ErrorKind::InvalidArgument, "interval needs lo <= hi");
  }
  if (lo == hi) return 0;
  return count_at_most(t, hi) - count_at_most(t, lo);
}

namespace {

// Implicit-shift QL on one unreduced or reducible tridiagonal; d and e are
// overwritten, e[k] coupling d[k] and d[k+1]. `budget` counts QL sweeps.
void ql_implicit(Eigen::Ref<Eigen::VectorXd> d, Eigen::Ref<Eigen::VectorXd> e, long& budget) {
  const Eigen::Index n = d.size();
  if (n <= 1) return;
  for (Eigen::Index l = 0; l < n; ++l) {
    for (;;) {
      Eigen::Index m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (--budget < 0) {
        throw Error(ErrorKind::NoConvergence, "implicit QL did not converge");
      }
      // Wilkinson-type shift from the leading 2x2 block.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      for (Eigen::Index i = m - 1; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

struct Block {
  Eigen::Index begin;
  Eigen::Index size;
};

std::vector<Block> unreduced_blocks(const TridiagonalForm& t) {
  std::vector<Block> blocks;
  const Eigen::Index n = t.diag.size();
  Eigen::Index begin = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double scale = std::abs(t.diag[i]) + std::abs(t.diag[i + 1]);
    if (std::abs(t.offdiag[i]) <= kEps * scale) {
      blocks.push_back({begin, i + 1 - begin});
      begin = i + 1;
    }
  }
  if (n > 0) blocks.push_back({begin, n - begin});
  return blocks;
}

// Partial-pivoting LU of a tridiagonal (T - lambda I) with the row layout
// of LAPACK's dgttrf: lower multipliers, diagonal of U and two superdiagonals.
class TridiagonalLu {
 public:
  TridiagonalLu(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double shift,
                double tiny)
      : d_(diag.array() - shift), du_(off), dl_(off), du2_(Eigen::VectorXd::Zero(off.size())),
        swapped_(static_cast<std::size_t>(off.size()), false) {
    const Eigen::Index n = d_.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        const double fact = d_[i] != 0.0 ? dl_[i] / d_[i] : 0.0;
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[static_cast<std::size_t>(i)] = true;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(d_[i]) < tiny) d_[i] = std::signbit(d_[i]) ? -tiny : tiny;
    }
  }

  void solve(Eigen::VectorXd& b) const {
    const Eigen::Index n = d_.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (!swapped_[static_cast<std::size_t>(i)]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i) {
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
  }

 private:
  Eigen::VectorXd d_, du_, dl_, du2_;
  std::vector<bool> swapped_;
};

// Inverse iteration for the eigenvalues `lambda` (ascending) of one unreduced
// block. Columns of `out` receive the block-local eigenvectors.
void block_inverse_iteration(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                             const Eigen::VectorXd& lambda, const std::vector<bool>& wanted,
                             Eigen::Index seed, Eigen::MatrixXd& out) {
  const Eigen::Index m = diag.size();
  double norm = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double row = std::abs(diag[i]);
    if (i > 0) row += std::abs(off[i - 1]);
    if (i + 1 < m) row += std::abs(off[i]);
    norm = std::max(norm, row);
  }
  norm = std::max(norm, std::numeric_limits<double>::min());
  const double ortol = 1e-4 * norm;
  const double pertol = 10.0 * kEps * norm;
  const double tiny = kEps * norm;
  constexpr int kIterations = 3;

  Eigen::Index cluster_begin = 0;
  double previous_shift = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (j == 0 || lambda[j] - lambda[j - 1] > ortol) cluster_begin = j;
    double shift = lambda[j];
    if (shift - previous_shift < pertol) shift = previous_shift + pertol;
    previous_shift = shift;
    if (!wanted[static_cast<std::size_t>(j)]) continue;

    const TridiagonalLu lu(diag, off, shift, tiny);
    for (Eigen::Index i = 0; i < m; ++i) {
      x[i] = 2.0 * counter_uniform(static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(j),
                                   static_cast<std::uint64_t>(i), Stream::Auxiliary) -
             1.0;
    }
    x.normalize();
    for (int it = 0; it < kIterations; ++it) {
      lu.solve(x);
      for (Eigen::Index k = cluster_begin; k < j; ++k) {
        if (!wanted[static_cast<std::size_t>(k)]) continue;
        x -= out.col(k).dot(x) * out.col(k);
      }
      x.normalize();
    }
    out.col(j) = x;
  }
}

}  // namespace

Eigen::VectorXd tridiagonal_eigenvalues(const TridiagonalForm& t) {
  return tridiagonal_eigen(t, false).eigenvalues;
}

SpectrumSummary tridiagonal_eigen(const TridiagonalForm& t, bool want_vectors, double lo,
                                  double hi) {
  const Eigen::Index n = t.diag.size();
  long budget = 30L * std::max<Eigen::Index>(n, 1);
  struct Entry {
    double value;
    Eigen::Index block;
    Eigen::Index local;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  const auto blocks = unreduced_blocks(t);
  std::vector<Eigen::VectorXd> block_values;
  block_values.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto [begin, size] = blocks[b];
    Eigen::VectorXd d = t.diag.segment(begin, size);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(size);
    if (size > 1) e.head(size - 1) = t.offdiag.segment(begin, size - 1);
    ql_implicit(d, e, budget);
    std::sort(d.data(), d.data() + d.size());
    for (Eigen::Index k = 0; k < size; ++k) entries.push_back({d[k], Eigen::Index(b), k});
    block_values.push_back(std::move(d));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  SpectrumSummary out;
  out.eigenvalues.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues[i] = entries[static_cast<std::size_t>(i)].value;
  if (!want_vectors) return out;

  // Position of each (block, local) pair in the sorted order.
  std::vector<std::vector<Eigen::Index>> column(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) column[b].resize(static_cast<std::size_t>(blocks[b].size));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& en = entries[static_cast<std::size_t>(i)];
    column[static_cast<std::size_t>(en.block)][static_cast<std::size_t>(en.local)] = i;
  }

  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto [begin, size] = blocks[b];
    const Eigen::VectorXd& values = block_values[b];
    std::vector<bool> wanted(static_cast<std::size_t>(size));
    bool any = false;
    for (Eigen::Index k = 0; k < size; ++k) {
      wanted[static_cast<std::size_t>(k)] = values[k] >= lo && values[k] <= hi;
      any = any || wanted[static_cast<std::size_t>(k)];
    }
    if (!any) continue;
    if (size == 1) {
      vectors(begin, column[b][0]) = 1.0;
      continue;
    }
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(size, size);
    Eigen::VectorXd d = t.diag.segment(begin, size);
    Eigen::VectorXd e = t.offdiag.segment(begin, size - 1);
    block_inverse_iteration(d, e, values, wanted, begin, local);
    for (Eigen::Index k = 0; k < size; ++k) {
      if (wanted[static_cast<std::size_t>(k)]) {
        vectors.col(column[b][static_cast<std::size_t>(k)]).segment(begin, size) = local.col(k);
      }
    }
  }
  out.eigenvectors = std::move(vectors);
  return out;
}

namespace {

SpectrumSummary decompose(const Eigen::MatrixXd& a, bool want_vectors, double lo, double hi) {
  const TridiagonalForm t = tridiagonalize(a, want_vectors);
  SpectrumSummary s = tridiagonal_eigen(t, want_vectors, lo, hi);
  if (!want_vectors) return s;
  const Eigen::Index n = s.n();
  std::vector<Eigen::Index> selected;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.eigenvalues[i] >= lo && s.eigenvalues[i] <= hi) selected.push_back(i);
  }
  auto& vectors = *s.eigenvectors;
  if (static_cast<Eigen::Index>(selected.size()) == n) {
    t.apply_q(vectors);
  } else {
    Eigen::MatrixXd packed(n, static_cast<Eigen::Index>(selected.size()));
    for (std::size_t k = 0; k < selected.size(); ++k) packed.col(Eigen::Index(k)) = vectors.col(selected[k]);
    t.apply_q(packed);
    for (std::size_t k = 0; k < selected.size(); ++k) vectors.col(selected[k]) = packed.col(Eigen::Index(k));
  }
  Eigen::VectorXd norms = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i : selected) norms[i] = vectors.col(i).cwiseAbs().maxCoeff();
  s.inf_norms = std::move(norms);
  return s;
}

}  // namespace

SpectrumSummary eigen_full(const Eigen::MatrixXd& a, bool want_vectors) {
  return decompose(a, want_vectors, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity());
}

SpectrumSummary eigen_full(const SampledMatrix& m, bool want_vectors) {
  return eigen_full(m.data, want_vectors);
}

SpectrumSummary eigen_selected(const Eigen::MatrixXd& a, double lo, double hi) {
  return decompose(a, true, lo, hi);
}

std::complex<double> stieltjes_empirical(const Eigen::VectorXd& eigenvalues, SpectralPoint point) {
  const SpectralPoint p = SpectralPoint::make(point.re, point.im);
  if (eigenvalues.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty spectrum");
  const std::complex<double> z = p.z();
  std::complex<double> sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) sum += 1.0 / (eigenvalues[i] - z);
  return sum / static_cast<double>(eigenvalues.size());
}

std::complex<double> stieltjes_empirical(const SpectrumSummary& s, SpectralPoint point) {
  return stieltjes_empirical(s.eigenvalues, point);
}

SchurCheck schur_resolvent_check(const Eigen::MatrixXd& w, int k, SpectralPoint point) {
  check_square(w);
  const SpectralPoint p = SpectralPoint::make(point.re, point.im);
  const Eigen::Index n = w.rows();
  if (k < 0 || k >= n) throw Error(ErrorKind::InvalidArgument, "row index out of range");
  const std::complex<double> z = p.z();

  Eigen::MatrixXcd shifted = w.cast<std::complex<double>>();
  shifted.diagonal().array() -= z;
  Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(n);
  unit[k] = 1.0;
  const Eigen::VectorXcd column = shifted.partialPivLu().solve(unit);

  std::complex<double> y = 0.0;
  if (n > 1) {
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != k) keep.push_back(i);
    Eigen::MatrixXcd minor(n - 1, n - 1);
    Eigen::VectorXcd a(n - 1);
    for (Eigen::Index c = 0; c < n - 1; ++c) {
      a[c] = w(keep[static_cast<std::size_t>(c)], k);
      for (Eigen::Index r = 0; r < n - 1; ++r)
        minor(r, c) = w(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
    }
    minor.diagonal().array() -= z;
    y = a.transpose() * minor.partialPivLu().solve(a);
  }
  return {column[k], 1.0 / (w(k, k) - z - y)};
}

SchurCheck schur_resolvent_check(const SampledMatrix& m, int k, SpectralPoint point) {
  return schur_resolvent_check(m.data, k, point);
}

Eigen::VectorXd eigvec_inf_norms(const SpectrumSummary& s) {
  if (!s.eigenvectors) throw Error(ErrorKind::MissingVectors, "spectrum has no eigenvectors");
  return s.eigenvectors->cwiseAbs().colwise().maxCoeff().transpose();
}

}  // namespace speclaw
