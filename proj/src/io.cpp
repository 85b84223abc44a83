#include "speclaw/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "speclaw/errors.hpp"

namespace speclaw {

namespace {

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

json complex_to_json(std::complex<double> c) { return json::array({c.real(), c.imag()}); }

std::complex<double> complex_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <typename F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed ") + what + ": " + e.what());
  }
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Config, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::Config, "matrix rows have different lengths");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

json profile_to_json(const Profile& profile) {
  if (const auto* full = std::get_if<VarianceProfile>(&profile)) {
    if (full->is_constant()) return {{"n", full->n()}, {"constant", full->entries()(0, 0)}};
    return {{"n", full->n()}, {"entries", matrix_to_json(full->entries())}};
  }
  const auto& block = std::get<BlockProfile>(profile);
  return {{"d", block.d()},
          {"weights", vector_to_json(block.weights())},
          {"coeffs", matrix_to_json(block.coeffs())}};
}

Profile profile_from_json(const json& j) {
  return parse_guard("profile", [&]() -> Profile {
    if (j.contains("d")) {
      auto block = BlockProfile::from_parts(vector_from_json(j.at("weights")),
                                            matrix_from_json(j.at("coeffs")));
      if (block.d() != j.at("d").get<int>()) throw Error(ErrorKind::Config, "profile d does not match");
      if (j.contains("n")) return block.expand(j.at("n").get<int>());
      return block;
    }
    const int n = j.at("n").get<int>();
    if (j.contains("constant")) return VarianceProfile::constant(n, j.at("constant").get<double>());
    auto full = VarianceProfile::from_entries(matrix_from_json(j.at("entries")));
    if (full.n() != n) throw Error(ErrorKind::Config, "profile n does not match its entries");
    return full;
  });
}

VarianceProfile full_profile_from_json(const json& j) {
  const Profile p = profile_from_json(j);
  if (const auto* full = std::get_if<VarianceProfile>(&p)) return *full;
  throw Error(ErrorKind::Config, "expected a full variance profile (give \"n\" to expand a block profile)");
}

json entry_law_to_json(const EntryLaw& law) {
  json j{{"kind", to_string(law.kind)}, {"bound", law.bound}};
  if (law.kind == EntryLaw::Kind::ScaledBernoulliCentered) j["q"] = law.q;
  return j;
}

EntryLaw entry_law_from_json(const json& j) {
  return parse_guard("entry law", [&] {
    EntryLaw law;
    switch (entry_law_kind(j.at("kind").get<std::string>())) {
      case EntryLaw::Kind::Rademacher: law = EntryLaw::rademacher(); break;
      case EntryLaw::Kind::UniformBounded: law = EntryLaw::uniform_bounded(); break;
      case EntryLaw::Kind::ScaledBernoulliCentered:
        law = EntryLaw::scaled_bernoulli_centered(j.value("q", 0.5));
        break;
    }
    if (j.contains("bound")) law.bound = j.at("bound").get<double>();
    law.validate();
    return law;
  });
}

namespace {

json wigner_to_json(const WignerSpec& s) {
  return {{"type", "wigner"},
          {"n", s.n},
          {"profile", profile_to_json(s.profile)},
          {"law", entry_law_to_json(s.law)},
          {"seed", s.seed}};
}

WignerSpec wigner_from_json(const json& j) {
  WignerSpec s;
  s.n = j.at("n").get<int>();
  if (s.n < 1) throw Error(ErrorKind::InvalidSpec, "matrix size must be positive");
  if (j.contains("profile")) {
    json pj = j.at("profile");
    if (pj.contains("d") && !pj.contains("n")) pj["n"] = s.n;
    s.profile = full_profile_from_json(pj);
  } else {
    s.profile = VarianceProfile::constant(s.n);
  }
  s.law = j.contains("law") ? entry_law_from_json(j.at("law")) : EntryLaw::rademacher();
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

}  // namespace

json ensemble_to_json(const EnsembleSpec& spec) {
  if (const auto* w = std::get_if<WignerSpec>(&spec)) return wigner_to_json(*w);
  if (const auto* sp = std::get_if<SparseSpec>(&spec)) {
    return {{"type", "sparse"}, {"base", wigner_to_json(sp->base)}, {"p", sp->p}};
  }
  const auto& sbm = std::get<SbmSpec>(spec);
  return {{"type", "sbm"}, {"sizes", sbm.sizes}, {"probs", matrix_to_json(sbm.probs)}, {"seed", sbm.seed}};
}

EnsembleSpec ensemble_from_json(const json& j) {
  return parse_guard("ensemble", [&]() -> EnsembleSpec {
    const auto type = j.at("type").get<std::string>();
    EnsembleSpec spec;
    if (type == "wigner") {
      spec = wigner_from_json(j);
    } else if (type == "sparse") {
      SparseSpec s;
      s.base = wigner_from_json(j.at("base"));
      s.p = j.at("p").get<double>();
      spec = s;
    } else if (type == "sbm") {
      SbmSpec s;
      s.sizes = j.at("sizes").get<std::vector<int>>();
      s.probs = matrix_from_json(j.at("probs"));
      s.seed = j.value("seed", std::uint64_t{0});
      spec = s;
    } else {
      throw Error(ErrorKind::Config, "unknown ensemble type '" + type + "'");
    }
    std::visit([](const auto& s) { s.validate(); }, spec);
    return spec;
  });
}

json solution_to_json(const QveSolution& s) {
  json g = json::array();
  for (Eigen::Index k = 0; k < s.g.size(); ++k) g.push_back(complex_to_json(s.g[k]));
  return {{"x", s.point.re}, {"eta", s.point.im}, {"m", complex_to_json(s.m)},
          {"g", g}, {"residual", s.residual}, {"iterations", s.iterations}};
}

json bulk_to_json(const std::vector<BulkInterval>& bulk) {
  json out = json::array();
  for (const auto& b : bulk) out.push_back({{"lo", b.lo}, {"hi", b.hi}, {"min_density", b.min_density}});
  return out;
}

std::vector<BulkInterval> bulk_from_json(const json& j) {
  std::vector<BulkInterval> out;
  for (const auto& b : j) out.push_back({b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("min_density").get<double>()});
  return out;
}

json local_law_config_to_json(const LocalLawConfig& cfg) {
  json j{{"ensemble", ensemble_to_json(cfg.ensemble)},
         {"eps", cfg.eps},
         {"delta", cfg.delta},
         {"interval_len_factor", cfg.interval_len_factor},
         {"num_intervals", cfg.num_intervals},
         {"trials", cfg.trials},
         {"base_seed", cfg.base_seed},
         {"pilot_trials", cfg.pilot_trials},
         {"grid", {{"lo", cfg.grid_lo}, {"hi", cfg.grid_hi}, {"points", cfg.grid_points}}},
         {"density_eta", cfg.density_eta}};
  if (cfg.interval_length) j["interval_length"] = *cfg.interval_length;
  return j;
}

LocalLawConfig local_law_config_from_json(const json& j) {
  return parse_guard("local-law config", [&] {
    LocalLawConfig cfg;
    cfg.ensemble = ensemble_from_json(j.at("ensemble"));
    cfg.eps = j.value("eps", cfg.eps);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.interval_len_factor = j.value("interval_len_factor", cfg.interval_len_factor);
    if (j.contains("interval_length")) cfg.interval_length = j.at("interval_length").get<double>();
    cfg.num_intervals = j.value("num_intervals", cfg.num_intervals);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.pilot_trials = j.value("pilot_trials", cfg.pilot_trials);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.grid_lo = g.value("lo", cfg.grid_lo);
      cfg.grid_hi = g.value("hi", cfg.grid_hi);
      cfg.grid_points = g.value("points", cfg.grid_points);
    }
    cfg.density_eta = j.value("density_eta", cfg.density_eta);
    cfg.validate();
    return cfg;
  });
}

json report_to_json(const LocalLawReport& r) {
  json intervals = json::array();
  for (const auto& rec : r.intervals) {
    intervals.push_back({{"lo", rec.lo}, {"hi", rec.hi}, {"predicted", rec.predicted},
                         {"observed", rec.observed}, {"deviation", rec.deviation}});
  }
  json j{{"kind", "local_law"},
         {"ensemble_type", r.ensemble_type},
         {"n", r.n},
         {"p_eff", r.p_eff},
         {"k_bound", r.k_bound},
         {"k_bound_flag", r.k_bound_flag},
         {"eps", r.eps},
         {"delta", r.delta},
         {"interval_length", r.interval_length},
         {"profile_hash", r.profile_hash},
         {"bulk", bulk_to_json(r.bulk)},
         {"intervals", intervals},
         {"trials", r.trials},
         {"base_seed", r.base_seed},
         {"trial_max_deviation", r.trial_max_deviation},
         {"summary", {{"max_deviation", r.max_deviation}, {"pass_fraction", r.pass_fraction}}},
         {"pilot_trials", r.pilot_trials}};
  if (r.pilot_max_deviation) j["pilot_max_deviation"] = *r.pilot_max_deviation;
  return j;
}

LocalLawReport local_law_report_from_json(const json& j) {
  return parse_guard("local-law report", [&] {
    LocalLawReport r;
    r.ensemble_type = j.at("ensemble_type").get<std::string>();
    r.n = j.at("n").get<int>();
    r.p_eff = j.at("p_eff").get<double>();
    r.k_bound = j.at("k_bound").get<double>();
    r.k_bound_flag = j.at("k_bound_flag").get<bool>();
    r.eps = j.at("eps").get<double>();
    r.delta = j.at("delta").get<double>();
    r.interval_length = j.at("interval_length").get<double>();
    r.profile_hash = j.at("profile_hash").get<std::string>();
    r.bulk = bulk_from_json(j.at("bulk"));
    for (const auto& rec : j.at("intervals")) {
      r.intervals.push_back({rec.at("lo").get<double>(), rec.at("hi").get<double>(),
                             rec.at("predicted").get<double>(), rec.at("observed").get<std::vector<int>>(),
                             rec.at("deviation").get<std::vector<double>>()});
    }
    r.trials = j.at("trials").get<int>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.trial_max_deviation = j.at("trial_max_deviation").get<std::vector<double>>();
    r.max_deviation = j.at("summary").at("max_deviation").get<double>();
    r.pass_fraction = j.at("summary").at("pass_fraction").get<double>();
    r.pilot_trials = j.value("pilot_trials", 0);
    if (j.contains("pilot_max_deviation")) r.pilot_max_deviation = j.at("pilot_max_deviation").get<double>();
    return r;
  });
}

json report_to_json(const StieltjesReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"x", p.x}, {"eta", p.eta}, {"predicted", complex_to_json(p.predicted)},
                      {"discrepancy", p.discrepancy}});
  }
  return {{"kind", "stieltjes"},
          {"ensemble_type", r.ensemble_type},
          {"n", r.n},
          {"eta_floor", r.eta_floor},
          {"points", points},
          {"trial_sup", r.trial_sup},
          {"summary", {{"median_sup", r.median_sup}, {"max_sup", r.max_sup}}},
          {"trials", r.trials},
          {"base_seed", r.base_seed}};
}

StieltjesReport stieltjes_report_from_json(const json& j) {
  return parse_guard("stieltjes report", [&] {
    StieltjesReport r;
    r.ensemble_type = j.at("ensemble_type").get<std::string>();
    r.n = j.at("n").get<int>();
    r.eta_floor = j.at("eta_floor").get<double>();
    for (const auto& p : j.at("points")) {
      r.points.push_back({p.at("x").get<double>(), p.at("eta").get<double>(),
                          complex_from_json(p.at("predicted")),
                          p.at("discrepancy").get<std::vector<double>>()});
    }
    r.trial_sup = j.at("trial_sup").get<std::vector<double>>();
    r.median_sup = j.at("summary").at("median_sup").get<double>();
    r.max_sup = j.at("summary").at("max_sup").get<double>();
    r.trials = j.at("trials").get<int>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    return r;
  });
}

json report_to_json(const DelocReport& r) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"bulk_count", t.bulk_count}, {"max_inf_norm", t.max_inf_norm},
                      {"max_ratio", t.max_ratio}, {"ratios", t.ratios}});
  }
  return {{"kind", "delocalization"},
          {"ensemble_type", r.ensemble_type},
          {"n", r.n},
          {"p_eff", r.p_eff},
          {"k_bound", r.k_bound},
          {"trials", trials},
          {"summary", {{"max_ratio", r.max_ratio}, {"median_ratio", r.median_ratio},
                       {"q90_ratio", r.q90_ratio}, {"q99_ratio", r.q99_ratio}}},
          {"base_seed", r.base_seed}};
}

DelocReport deloc_report_from_json(const json& j) {
  return parse_guard("delocalization report", [&] {
    DelocReport r;
    r.ensemble_type = j.at("ensemble_type").get<std::string>();
    r.n = j.at("n").get<int>();
    r.p_eff = j.at("p_eff").get<double>();
    r.k_bound = j.at("k_bound").get<double>();
    for (const auto& t : j.at("trials")) {
      r.trials.push_back({t.at("bulk_count").get<int>(), t.at("max_inf_norm").get<double>(),
                          t.at("max_ratio").get<double>(), t.at("ratios").get<std::vector<double>>()});
    }
    const auto& s = j.at("summary");
    r.max_ratio = s.at("max_ratio").get<double>();
    r.median_ratio = s.at("median_ratio").get<double>();
    r.q90_ratio = s.at("q90_ratio").get<double>();
    r.q99_ratio = s.at("q99_ratio").get<double>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    return r;
  });
}

json projection_spec_to_json(const ProjectionTestSpec& s) {
  return {{"n", s.n}, {"sigma", vector_to_json(s.sigma)}, {"subspace_dim", s.subspace_dim},
          {"weights", vector_to_json(s.weights)}, {"t_grid", s.t_grid}, {"trials", s.trials},
          {"seed", s.seed}};
}

ProjectionTestSpec projection_spec_from_json(const json& j) {
  return parse_guard("projection spec", [&] {
    ProjectionTestSpec s;
    s.n = j.at("n").get<int>();
    s.subspace_dim = j.at("subspace_dim").get<int>();
    s.sigma = j.contains("sigma") ? vector_from_json(j.at("sigma")) : Eigen::VectorXd::Ones(s.n);
    s.weights = j.contains("weights") ? vector_from_json(j.at("weights"))
                                      : Eigen::VectorXd::Ones(s.subspace_dim);
    s.t_grid = j.at("t_grid").get<std::vector<double>>();
    s.trials = j.value("trials", s.trials);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
  });
}

json report_to_json(const ProjectionTable& t) {
  json j{{"kind", "projection"},   {"t", t.t},
         {"failure_rate", t.failure_rate}, {"k_bound", t.k_bound},
         {"center", t.center},     {"monotone", t.monotone}};
  if (t.fit_c) j["fit_c"] = *t.fit_c;
  if (t.fit_c_prime) j["fit_c_prime"] = *t.fit_c_prime;
  return j;
}

ProjectionTable projection_table_from_json(const json& j) {
  return parse_guard("projection table", [&] {
    ProjectionTable t;
    t.t = j.at("t").get<std::vector<double>>();
    t.failure_rate = j.at("failure_rate").get<std::vector<double>>();
    t.k_bound = j.at("k_bound").get<double>();
    t.center = j.at("center").get<double>();
    t.monotone = j.at("monotone").get<bool>();
    if (j.contains("fit_c")) t.fit_c = j.at("fit_c").get<double>();
    if (j.contains("fit_c_prime")) t.fit_c_prime = j.at("fit_c_prime").get<double>();
    return t;
  });
}

json report_to_json(const InterlacingResult& r) {
  return {{"kind", "interlacing"}, {"trials", r.trials}, {"n", r.n}, {"checks", r.checks},
          {"violations", r.violations}, {"max_shift_by_rank", r.max_shift_by_rank}};
}

InterlacingResult interlacing_result_from_json(const json& j) {
  return parse_guard("interlacing result", [&] {
    InterlacingResult r;
    r.trials = j.at("trials").get<int>();
    r.n = j.at("n").get<int>();
    r.checks = j.at("checks").get<int>();
    r.violations = j.at("violations").get<int>();
    r.max_shift_by_rank = j.at("max_shift_by_rank").get<std::vector<int>>();
    return r;
  });
}

void write_density_csv(const DensityCurve& curve, std::ostream& os) {
  os << "x,rho\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) os << num(curve.grid[i]) << ',' << num(curve.values[i]) << '\n';
}

void write_spectrum_csv(const SpectrumSummary& s, std::ostream& os) {
  os << "index,eigenvalue,inf_norm\n";
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    os << i << ',' << num(s.eigenvalues[i]) << ',';
    if (s.inf_norms && !std::isnan((*s.inf_norms)[i])) os << num((*s.inf_norms)[i]);
    os << '\n';
  }
}

void write_local_law_csv(const LocalLawReport& r, std::ostream& os) {
  os << "interval,lo,hi,predicted,trial,observed,deviation\n";
  for (std::size_t k = 0; k < r.intervals.size(); ++k) {
    const auto& rec = r.intervals[k];
    for (std::size_t t = 0; t < rec.observed.size(); ++t) {
      os << k << ',' << num(rec.lo) << ',' << num(rec.hi) << ',' << num(rec.predicted) << ',' << t
         << ',' << rec.observed[t] << ',' << num(rec.deviation[t]) << '\n';
    }
  }
}

void write_stieltjes_csv(const StieltjesReport& r, std::ostream& os) {
  os << "x,eta,trial,predicted_re,predicted_im,discrepancy\n";
  for (const auto& p : r.points) {
    for (std::size_t t = 0; t < p.discrepancy.size(); ++t) {
      os << num(p.x) << ',' << num(p.eta) << ',' << t << ',' << num(p.predicted.real()) << ','
         << num(p.predicted.imag()) << ',' << num(p.discrepancy[t]) << '\n';
    }
  }
}

void write_deloc_csv(const DelocReport& r, std::ostream& os) {
  os << "trial,index,ratio\n";
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    const auto& ratios = r.trials[t].ratios;
    for (std::size_t i = 0; i < ratios.size(); ++i) os << t << ',' << i << ',' << num(ratios[i]) << '\n';
  }
}

void write_projection_csv(const ProjectionTable& t, std::ostream& os) {
  os << "t,failure_rate\n";
  for (std::size_t i = 0; i < t.t.size(); ++i) os << num(t.t[i]) << ',' << num(t.failure_rate[i]) << '\n';
}

void write_matrix_binary(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "binary format holds square matrices");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const std::uint64_t n = to_little(static_cast<std::uint64_t>(m.rows()));
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(m(i, j)));
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  n = to_little(n);
  if (!is || n > (std::uint64_t{1} << 20)) throw Error(ErrorKind::Io, "bad matrix header in " + path.string());
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      std::uint64_t bits = 0;
      is.read(reinterpret_cast<char*>(&bits), sizeof bits);
      m(i, j) = std::bit_cast<double>(to_little(bits));
    }
  }
  if (!is) throw Error(ErrorKind::Io, "truncated matrix file " + path.string());
  return m;
}

void write_matrix_market(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  if (m.rows() != m.cols() || m != m.transpose()) {
    throw Error(ErrorKind::InvalidArgument, "Matrix Market export expects a symmetric matrix");
  }
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os << "%%MatrixMarket matrix array real symmetric\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i) os << num(m(i, j)) << '\n';
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "array" || field != "real") {
    throw Error(ErrorKind::Io, "unsupported Matrix Market header in " + path.string());
  }
  const bool symmetric = symmetry == "symmetric";
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream dims(line);
  Eigen::Index rows = 0, cols = 0;
  dims >> rows >> cols;
  if (rows <= 0 || cols <= 0) throw Error(ErrorKind::Io, "bad Matrix Market size line");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = symmetric ? j : 0; i < rows; ++i) {
      if (!(is >> m(i, j))) throw Error(ErrorKind::Io, "truncated Matrix Market file");
      if (symmetric) m(j, i) = m(i, j);
    }
  }
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace speclaw
