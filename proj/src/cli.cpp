#include "speclaw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "speclaw/errors.hpp"
#include "speclaw/io.hpp"
#include "speclaw/parallel.hpp"

namespace speclaw {

namespace {

struct Grid {
  double lo = -3.0;
  double hi = 3.0;
  int count = 601;
};

Grid parse_grid(const std::string& text) {
  Grid g;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.count) || c1 != ':' || c2 != ':' || !is.eof() ||
      g.count < 2 || !(g.hi > g.lo)) {
    throw Error(ErrorKind::Config, "grid must look like lo:hi:count with lo < hi and count >= 2",
                json{{"grid", text}}.dump());
  }
  return g;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::Config, "empty list");
  return out;
}

// Accepts a path or inline JSON text.
json load_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Config, std::string("invalid inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Options {
  std::string profile, ensemble, config, out, matrix, csv, eta_grid;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, threads, n, dim, rank;
  std::optional<double> eta, eps, delta, x, interval_length;
  std::optional<std::string> grid;
  bool vectors = false;
};

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
}

void emit_json(const json& j, const Options& o, std::ostream& out) { emit(j.dump(2) + "\n", o, out); }

void emit_csv(const std::string& csv, const Options& o) {
  if (!o.csv.empty()) write_text_file(o.csv, csv);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << v;
  return os.str();
}

Profile require_profile(const Options& o) {
  if (o.profile.empty()) throw Error(ErrorKind::Config, "--profile is required");
  return profile_from_json(load_json(o.profile));
}

EnsembleSpec require_ensemble(const Options& o) {
  if (o.ensemble.empty()) throw Error(ErrorKind::Config, "--ensemble is required");
  auto spec = ensemble_from_json(load_json(o.ensemble));
  if (o.seed) spec = with_seed(std::move(spec), *o.seed);
  return spec;
}

LocalLawConfig local_law_config(const Options& o) {
  LocalLawConfig cfg;
  if (!o.config.empty()) {
    cfg = local_law_config_from_json(load_json(o.config));
  } else if (!o.ensemble.empty()) {
    cfg.ensemble = ensemble_from_json(load_json(o.ensemble));
  } else {
    throw Error(ErrorKind::Config, "--config or --ensemble is required");
  }
  if (!o.ensemble.empty() && !o.config.empty()) cfg.ensemble = ensemble_from_json(load_json(o.ensemble));
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.eps) cfg.eps = *o.eps;
  if (o.delta) cfg.delta = *o.delta;
  if (o.eta) cfg.density_eta = *o.eta;
  if (o.interval_length) cfg.interval_length = *o.interval_length;
  if (o.grid) {
    const Grid g = parse_grid(*o.grid);
    cfg.grid_lo = g.lo;
    cfg.grid_hi = g.hi;
    cfg.grid_points = g.count;
  }
  cfg.threads = resolve_threads(o.threads.value_or(cfg.threads));
  cfg.validate();
  return cfg;
}

int cmd_qve_solve(const Options& o, std::ostream& out) {
  const Profile profile = require_profile(o);
  const double eta = o.eta.value_or(1e-3);
  std::vector<double> xs;
  if (o.grid) {
    const Grid g = parse_grid(*o.grid);
    xs = uniform_grid(g.lo, g.hi, g.count);
  } else {
    xs.push_back(o.x.value_or(0.0));
  }
  // Continuation from eta = 1 reaches small heights without losing the
  // physical branch.
  const double start = std::max(1.0, eta);
  const int steps = std::max(1, static_cast<int>(std::ceil(std::log(start / eta) / std::log(1 / 0.7))) + 1);
  std::vector<QveSolution> sols(xs.size());
  parallel_for(xs.size(), resolve_threads(o.threads.value_or(0)), [&](std::size_t i) {
    sols[i] = solve_qve_continuation(profile, xs[i], start, eta, steps);
  });
  double worst = 0.0;
  json j = json::array();
  for (const auto& s : sols) {
    worst = std::max(worst, s.residual);
    j.push_back(solution_to_json(s));
  }
  emit_json(sols.size() == 1 ? j[0] : j, o, out);
  if (sols.size() == 1) {
    out << "m=" << fmt(sols[0].m.real()) << (sols[0].m.imag() < 0 ? "" : "+") << fmt(sols[0].m.imag())
        << "i residual=" << fmt(sols[0].residual) << " iterations=" << sols[0].iterations << '\n';
  } else {
    out << "points=" << sols.size() << " max_residual=" << fmt(worst) << '\n';
  }
  return 0;
}

int cmd_density(const Options& o, std::ostream& out) {
  const Profile profile = require_profile(o);
  const Grid g = o.grid ? parse_grid(*o.grid) : Grid{};
  DensityOptions opts;
  if (o.eta) opts.eta = *o.eta;
  opts.threads = resolve_threads(o.threads.value_or(0));
  const auto grid = uniform_grid(g.lo, g.hi, g.count);
  const DensityCurve curve = extract_density(profile, grid, opts);
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  write_density_csv(curve, csv);
  emit(csv.str(), o, out);
  const double mass = integrate_density(curve, g.lo, g.hi);
  const auto bulk = detect_bulk(curve, o.eps.value_or(0.1));
  out << "mass=" << fmt(mass) << " eta=" << fmt(curve.eta_used) << " bulk_intervals=" << bulk.size()
      << " profile=" << curve.profile_hash << '\n';
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const EnsembleSpec spec = require_ensemble(o);
  const SampledMatrix m = sample_normalized(spec);
  if (o.out.empty()) throw Error(ErrorKind::Config, "--out is required for sample");
  if (ends_with(o.out, ".mtx")) {
    write_matrix_market(m.data, o.out);
  } else {
    write_matrix_binary(m.data, o.out);
  }
  json meta{{"n", m.n},
            {"scaling", {{"kind", to_string(m.scaling.kind)}, {"factor", m.scaling.factor}}},
            {"ensemble", json::parse(m.provenance)}};
  write_text_file(o.out + ".json", meta.dump(2) + "\n");
  out << "n=" << m.n << " scaling=" << to_string(m.scaling.kind) << " seed=" << ensemble_seed(spec) << '\n';
  return 0;
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  return ends_with(path, ".mtx") ? read_matrix_market(path) : read_matrix_binary(path);
}

int cmd_spectrum(const Options& o, std::ostream& out) {
  Eigen::MatrixXd a;
  if (!o.matrix.empty()) {
    a = load_matrix(o.matrix);
    if (a.rows() != a.cols() || a != a.transpose()) {
      throw Error(ErrorKind::InvalidArgument, "spectrum needs a square symmetric matrix");
    }
  } else {
    a = sample_normalized(require_ensemble(o)).data;
  }
  SpectrumSummary s = eigen_full(a, o.vectors);
  if (o.vectors) s.inf_norms = eigvec_inf_norms(s);
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  write_spectrum_csv(s, csv);
  emit(csv.str(), o, out);
  out << "n=" << s.n();
  if (s.n() > 0) out << " lambda_min=" << fmt(s.eigenvalues.minCoeff()) << " lambda_max=" << fmt(s.eigenvalues.maxCoeff());
  if (o.vectors && s.n() > 0) out << " max_inf_norm=" << fmt(s.inf_norms->maxCoeff());
  out << '\n';
  return 0;
}

int cmd_verify_local_law(const Options& o, std::ostream& out) {
  const LocalLawConfig cfg = local_law_config(o);
  const LocalLawReport r = verify_local_law(cfg);
  emit_json(report_to_json(r), o, out);
  std::ostringstream csv;
  write_local_law_csv(r, csv);
  emit_csv(csv.str(), o);
  out << "pass_fraction=" << fmt(r.pass_fraction) << " max_deviation=" << fmt(r.max_deviation)
      << " interval_length=" << fmt(r.interval_length) << " trials=" << r.trials << '\n';
  return 0;
}

int cmd_verify_stieltjes(const Options& o, std::ostream& out) {
  const LocalLawConfig cfg = local_law_config(o);
  const std::vector<double> etas = o.eta_grid.empty() ? std::vector<double>{0.5, 0.2, 0.1} : parse_list(o.eta_grid);
  const StieltjesReport r = verify_stieltjes_closeness(cfg, etas);
  emit_json(report_to_json(r), o, out);
  std::ostringstream csv;
  write_stieltjes_csv(r, csv);
  emit_csv(csv.str(), o);
  out << "median_sup=" << fmt(r.median_sup) << " max_sup=" << fmt(r.max_sup) << " eta_floor=" << fmt(r.eta_floor)
      << " trials=" << r.trials << '\n';
  return 0;
}

int cmd_verify_deloc(const Options& o, std::ostream& out) {
  const LocalLawConfig cfg = local_law_config(o);
  const DelocReport r = verify_delocalization(cfg);
  emit_json(report_to_json(r), o, out);
  std::ostringstream csv;
  write_deloc_csv(r, csv);
  emit_csv(csv.str(), o);
  out << "max_ratio=" << fmt(r.max_ratio) << " median_ratio=" << fmt(r.median_ratio)
      << " q99_ratio=" << fmt(r.q99_ratio) << " trials=" << r.trials.size() << '\n';
  return 0;
}

int cmd_test_projection(const Options& o, std::ostream& out) {
  ProjectionTestSpec spec;
  if (!o.config.empty()) {
    spec = projection_spec_from_json(load_json(o.config));
  } else {
    spec.n = o.n.value_or(400);
    spec.subspace_dim = o.dim.value_or(100);
    spec.sigma = Eigen::VectorXd::Ones(spec.n);
    spec.weights = Eigen::VectorXd::Ones(spec.subspace_dim);
    for (int k = 1; k <= 8; ++k) spec.t_grid.push_back(k);
  }
  if (o.trials) spec.trials = *o.trials;
  if (o.seed) spec.seed = *o.seed;
  spec.validate();
  const ProjectionTable t = projection_concentration_test(spec);
  emit_json(report_to_json(t), o, out);
  std::ostringstream csv;
  write_projection_csv(t, csv);
  emit_csv(csv.str(), o);
  out << "monotone=" << (t.monotone ? "true" : "false") << " center=" << fmt(t.center)
      << " max_failure_rate=" << fmt(t.failure_rate.empty() ? 0.0 : *std::max_element(t.failure_rate.begin(), t.failure_rate.end())) << '\n';
  return 0;
}

int cmd_test_interlacing(const Options& o, std::ostream& out) {
  const InterlacingResult r =
      interlacing_test(o.trials.value_or(500), o.n.value_or(50), o.seed.value_or(1), o.rank.value_or(5));
  emit_json(report_to_json(r), o, out);
  out << "violations=" << r.violations << " checks=" << r.checks << " trials=" << r.trials << '\n';
  return 0;
}

int error_exit(std::ostream& err, const std::string& kind, const std::string& message, const std::string& detail) {
  const int code = exit_code_for(kind);
  json d;
  try {
    d = json::parse(detail);
  } catch (const json::exception&) {
    d = detail;
  }
  err << json{{"error", kind}, {"message", message}, {"detail", d}, {"exit_code", code}}.dump() << '\n';
  return code;
}

}  // namespace

int exit_code_for(const std::string& kind) {
  if (kind == "NonConvergence" || kind == "NoConvergence" || kind == "EmptyBulk") return 2;
  if (kind == "AssertionFailure") return 3;
  return 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic vector equation solver and local-law verification harness", "speclaw"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (stdout when absent)");
    sub->add_option("--threads", o.threads, "Worker threads (falls back to SPECLAW_THREADS, then 1)");
  };
  auto add_campaign = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--config", o.config, "Local-law config JSON");
    sub->add_option("--ensemble", o.ensemble, "Ensemble JSON (replaces the config's ensemble)");
    sub->add_option("--trials", o.trials, "Number of trials");
    sub->add_option("--seed", o.seed, "Base seed; trial i uses seed + i");
    sub->add_option("--eps", o.eps, "Bulk density threshold");
    sub->add_option("--delta", o.delta, "Allowed normalized count deviation");
    sub->add_option("--eta", o.eta, "Height used for the predicted density");
    sub->add_option("--grid", o.grid, "Density grid lo:hi:count");
    sub->add_option("--interval-length", o.interval_length, "Explicit interval length");
    sub->add_option("--csv", o.csv, "Also write a per-trial CSV table here");
  };

  auto* qve = app.add_subcommand("qve-solve", "Solve the QVE at x + i eta");
  add_common(qve);
  qve->add_option("--profile", o.profile, "Variance profile JSON");
  qve->add_option("--x", o.x, "Real part (default 0)");
  qve->add_option("--eta", o.eta, "Imaginary part (default 1e-3)")->check(CLI::PositiveNumber);
  qve->add_option("--grid", o.grid, "Solve on lo:hi:count instead of a single x");

  auto* density = app.add_subcommand("density", "Tabulate the predicted density as CSV");
  add_common(density);
  density->add_option("--profile", o.profile, "Variance profile JSON");
  density->add_option("--grid", o.grid, "Grid lo:hi:count (default -3:3:601)");
  density->add_option("--eta", o.eta, "Final height (default 1e-6)")->check(CLI::PositiveNumber);
  density->add_option("--eps", o.eps, "Bulk threshold reported in the summary (default 0.1)");

  auto* sample = app.add_subcommand("sample", "Sample a normalized matrix (.mtx or raw binary)");
  add_common(sample);
  sample->add_option("--ensemble", o.ensemble, "Ensemble JSON");
  sample->add_option("--seed", o.seed, "Override the ensemble seed");

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues (and eigenvector sup-norms) as CSV");
  add_common(spectrum);
  spectrum->add_option("--matrix", o.matrix, "Matrix file (.mtx or raw binary)");
  spectrum->add_option("--ensemble", o.ensemble, "Sample this ensemble instead");
  spectrum->add_option("--seed", o.seed, "Override the ensemble seed");
  spectrum->add_flag("--vectors", o.vectors, "Compute eigenvector sup-norms");

  auto* llaw = app.add_subcommand("verify-local-law", "Eigenvalue counts on short bulk intervals");
  add_campaign(llaw);
  auto* stj = app.add_subcommand("verify-stieltjes", "Empirical versus predicted Stieltjes transform");
  add_campaign(stj);
  stj->add_option("--eta-grid", o.eta_grid, "Comma-separated heights (default 0.5,0.2,0.1)");
  auto* deloc = app.add_subcommand("verify-deloc", "Sup-norms of bulk eigenvectors");
  add_campaign(deloc);

  auto* proj = app.add_subcommand("test-projection", "Concentration of quadratic forms on projections");
  add_common(proj);
  proj->add_option("--config", o.config, "Projection test JSON");
  proj->add_option("--n", o.n, "Dimension (default 400)");
  proj->add_option("--dim", o.dim, "Subspace dimension (default 100)");
  proj->add_option("--trials", o.trials, "Number of samples");
  proj->add_option("--seed", o.seed, "Seed");

  auto* inter = app.add_subcommand("test-interlacing", "Rank-r perturbation count shifts");
  add_common(inter);
  inter->add_option("--trials", o.trials, "Number of trials (default 500)");
  inter->add_option("--n", o.n, "Matrix size (default 50)");
  inter->add_option("--seed", o.seed, "Seed (default 1)");
  inter->add_option("--rank", o.rank, "Largest rank checked (default 5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    return error_exit(err, "Config", e.what(), "{}");
  }

  try {
    if (qve->parsed()) return cmd_qve_solve(o, out);
    if (density->parsed()) return cmd_density(o, out);
    if (sample->parsed()) return cmd_sample(o, out);
    if (spectrum->parsed()) return cmd_spectrum(o, out);
    if (llaw->parsed()) return cmd_verify_local_law(o, out);
    if (stj->parsed()) return cmd_verify_stieltjes(o, out);
    if (deloc->parsed()) return cmd_verify_deloc(o, out);
    if (proj->parsed()) return cmd_test_projection(o, out);
    if (inter->parsed()) return cmd_test_interlacing(o, out);
  } catch (const Error& e) {
    return error_exit(err, std::string(to_string(e.kind())), e.what(), e.detail());
  } catch (const json::exception& e) {
    return error_exit(err, "Config", e.what(), "{}");
  } catch (const std::exception& e) {
    return error_exit(err, "Io", e.what(), "{}");
  }
  return error_exit(err, "Config", "no command given", "{}");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"speclaw"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace speclaw
