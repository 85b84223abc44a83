#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "speclaw/cli.hpp"
#include "speclaw/errors.hpp"
#include "speclaw/io.hpp"

namespace py = pybind11;
using namespace speclaw;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string dump(const json& j) { return j.dump(); }

Profile parse_profile(const std::string& text) { return profile_from_json(json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "QVE solver, random matrix samplers and local-law verification";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result([&]() { return py::exception<Error>(m, "SpeclawError"); });
  // Raised with args (kind, message, detail_json).
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(std::string(to_string(e.kind())), e.what(), e.detail());
      PyErr_SetObject(error.get_stored().ptr(), args.ptr());
    } catch (const json::exception& e) {
      PyErr_SetObject(error.get_stored().ptr(), py::make_tuple("Config", e.what(), "{}").ptr());
    }
  });

  m.def(
      "solve_qve",
      [](const std::string& profile, double x, double eta, double eta_start, int steps) {
        const Profile p = parse_profile(profile);
        py::gil_scoped_release release;
        const QveSolution s = eta_start > eta ? solve_qve_continuation(p, x, eta_start, eta, steps)
                                              : solve_qve(p, SpectralPoint::make(x, eta));
        return dump(solution_to_json(s));
      },
      py::arg("profile"), py::arg("x"), py::arg("eta"), py::arg("eta_start") = 0.0, py::arg("steps") = 40);

  m.def(
      "extract_density",
      [](const std::string& profile, std::vector<double> grid, double eta, int threads) {
        const Profile p = parse_profile(profile);
        DensityOptions opts;
        opts.eta = eta;
        opts.threads = threads;
        py::gil_scoped_release release;
        const DensityCurve c = extract_density(p, grid, opts);
        return c.values;
      },
      py::arg("profile"), py::arg("grid"), py::arg("eta") = 1e-6, py::arg("threads") = 1);

  m.def(
      "integrate_density",
      [](const std::string& profile, double lo, double hi, int points) {
        const Profile p = parse_profile(profile);
        py::gil_scoped_release release;
        const auto grid = uniform_grid(lo, hi, points);
        return integrate_density(extract_density(p, grid), lo, hi);
      },
      py::arg("profile"), py::arg("lo"), py::arg("hi"), py::arg("points") = 201);

  m.def(
      "detect_bulk",
      [](const std::string& profile, std::vector<double> grid, double eps) {
        const Profile p = parse_profile(profile);
        py::gil_scoped_release release;
        return dump(bulk_to_json(detect_bulk(extract_density(p, grid), eps)));
      },
      py::arg("profile"), py::arg("grid"), py::arg("eps"));

  m.def(
      "effective_profile",
      [](const std::string& ensemble) { return dump(profile_to_json(effective_profile(ensemble_from_json(json::parse(ensemble))))); },
      py::arg("ensemble"));

  m.def(
      "sample",
      [](const std::string& ensemble) {
        const EnsembleSpec spec = ensemble_from_json(json::parse(ensemble));
        py::gil_scoped_release release;
        return sample_normalized(spec).data;
      },
      py::arg("ensemble"));

  m.def(
      "eigenvalues",
      [](const Eigen::MatrixXd& a) {
        py::gil_scoped_release release;
        return eigen_full(a, false).eigenvalues;
      },
      py::arg("a"));

  m.def(
      "eigvec_inf_norms",
      [](const Eigen::MatrixXd& a) {
        py::gil_scoped_release release;
        return eigvec_inf_norms(eigen_full(a, true));
      },
      py::arg("a"));

  m.def(
      "count_in_interval",
      [](const Eigen::MatrixXd& a, double lo, double hi) {
        py::gil_scoped_release release;
        return count_in_interval(tridiagonalize(a), lo, hi);
      },
      py::arg("a"), py::arg("lo"), py::arg("hi"));

  m.def(
      "schur_discrepancy",
      [](const Eigen::MatrixXd& a, int k, double x, double eta) {
        return schur_resolvent_check(a, k, SpectralPoint::make(x, eta)).discrepancy();
      },
      py::arg("a"), py::arg("k"), py::arg("x"), py::arg("eta"));

  m.def(
      "verify_local_law",
      [](const std::string& config) {
        const LocalLawConfig cfg = local_law_config_from_json(json::parse(config));
        py::gil_scoped_release release;
        return dump(report_to_json(verify_local_law(cfg)));
      },
      py::arg("config"));

  m.def(
      "verify_delocalization",
      [](const std::string& config) {
        const LocalLawConfig cfg = local_law_config_from_json(json::parse(config));
        py::gil_scoped_release release;
        return dump(report_to_json(verify_delocalization(cfg)));
      },
      py::arg("config"));

  m.def(
      "projection_test",
      [](const std::string& spec) {
        const ProjectionTestSpec s = projection_spec_from_json(json::parse(spec));
        py::gil_scoped_release release;
        return dump(report_to_json(projection_concentration_test(s)));
      },
      py::arg("spec"));

  m.def(
      "interlacing_test",
      [](int trials, int n, std::uint64_t seed, int max_rank) {
        py::gil_scoped_release release;
        return dump(report_to_json(interlacing_test(trials, n, seed, max_rank)));
      },
      py::arg("trials"), py::arg("n"), py::arg("seed") = 1, py::arg("max_rank") = 5);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

#ifdef VERSION_INFO
#define SPECLAW_STR(x) #x
#define SPECLAW_XSTR(x) SPECLAW_STR(x)
  m.attr("__version__") = SPECLAW_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
