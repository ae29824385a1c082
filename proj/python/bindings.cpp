#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "aaadmm/experiment.hpp"

namespace py = pybind11;
using namespace aaadmm;

namespace {

std::string status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::max_iterations: return "max_iterations";
    case TerminalStatus::diverged: return "diverged";
  }
  return "?";
}

FixedPointMap map_from_callable(const std::function<Vector(const Vector&)>& fn,
                                Eigen::Index dimension) {
  FixedPointMap map;
  map.dimension = dimension;
  map.evaluate = fn;
  return map;
}

Scheme scheme_from_string(const std::string& text) {
  SchemeSpec spec = parse_scheme(text);
  if (spec.kind == SchemeSpec::Kind::plain) return PlainScheme{};
  if (spec.kind == SchemeSpec::Kind::aa) return AAScheme{spec.m};
  if (spec.source != SchemeSpec::BetaSource::explicit_beta)
    throw std::invalid_argument(
        "run(): sAA needs explicit coefficients here (\"saa<m>:beta=...\"); resolve theory or "
        "sweep coefficients via optimal_saa1 / brute_force_sweep first");
  SAAPlan plan;
  plan.m = spec.m;
  plan.beta = spec.explicit_beta;
  plan.provenance = BetaProvenance::user_supplied;
  return SAAScheme{plan};
}

IterationTrace run_generic(const FixedPointMap& map, const std::string& scheme, const Vector& x0,
                           int max_iter, double tol, const std::optional<Vector>& reference) {
  return run_accelerated(map, x0, scheme_from_string(scheme), max_iter, tol, reference);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ADMM fixed-point solvers with Anderson acceleration and optimal stationary "
            "coefficient analysis";

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_property_readonly("kind",
                             [](const ProblemInstance& p) { return to_string(p.kind); })
      .def_readonly("data_matrix", &ProblemInstance::data_matrix)
      .def_readonly("rhs", &ProblemInstance::rhs)
      .def_readonly("reg_lambda", &ProblemInstance::reg_lambda)
      .def_readonly("smoothing_alpha", &ProblemInstance::smoothing_alpha)
      .def_readonly("penalty_rho", &ProblemInstance::penalty_rho)
      .def_readonly("seed", &ProblemInstance::seed)
      .def_readonly("density", &ProblemInstance::density)
      .def_readonly("scaled_projection", &ProblemInstance::scaled_projection)
      .def_property_readonly("fpi_dimension",
                             [](const ProblemInstance& p) { return fpi_dimension(p); })
      .def("__repr__", [](const ProblemInstance& p) {
        return "<ProblemInstance " + to_string(p.kind) + " seed=" + std::to_string(p.seed) + ">";
      });

  py::class_<IterationTrace>(m, "IterationTrace")
      .def_property_readonly("k",
                             [](const IterationTrace& t) {
                               std::vector<int> ks;
                               for (const auto& r : t.records) ks.push_back(r.k);
                               return ks;
                             })
      .def_property_readonly("error_norm",
                             [](const IterationTrace& t) {
                               std::vector<double> es;
                               for (const auto& r : t.records) es.push_back(r.error_norm);
                               return es;
                             })
      .def_property_readonly(
          "primal_residual",
          [](const IterationTrace& t) {
            std::vector<double> vs;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (const auto& r : t.records) vs.push_back(r.primal_residual.value_or(nan));
            return vs;
          })
      .def_property_readonly(
          "dual_residual",
          [](const IterationTrace& t) {
            std::vector<double> vs;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (const auto& r : t.records) vs.push_back(r.dual_residual.value_or(nan));
            return vs;
          })
      .def_readonly("final_iterate", &IterationTrace::final_iterate)
      .def_property_readonly(
          "status", [](const IterationTrace& t) { return status_name(t.terminal_status); })
      .def("__len__", [](const IterationTrace& t) { return t.records.size(); })
      .def("to_csv", &trace_to_csv);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("eigenvalues", &Spectrum::eigenvalues)
      .def_readonly("spectral_radius", &Spectrum::spectral_radius)
      .def_readonly("imag_tolerance", &Spectrum::imag_tolerance)
      .def_property_readonly("is_real", [](const Spectrum& s) { return s.is_real(); })
      .def_property_readonly("sigma_min",
                             [](const Spectrum& s) -> std::optional<double> {
                               if (!s.is_real()) return std::nullopt;
                               return s.real_stats().sigma_min;
                             })
      .def_property_readonly("sigma_max",
                             [](const Spectrum& s) -> std::optional<double> {
                               if (!s.is_real()) return std::nullopt;
                               return s.real_stats().sigma_max;
                             })
      .def_property_readonly("mu_plus",
                             [](const Spectrum& s) -> std::optional<double> {
                               if (s.is_real()) return s.real_stats().sigma_max >= 0
                                                           ? std::optional<double>(
                                                                 s.real_stats().sigma_max)
                                                           : std::nullopt;
                               return s.complex_stats().mu_plus;
                             })
      .def("to_csv", &spectrum_to_csv)
      .def("__repr__", [](const Spectrum& s) {
        return "<Spectrum n=" + std::to_string(s.eigenvalues.size()) +
               " radius=" + std::to_string(s.spectral_radius) +
               (s.is_real() ? " real>" : " complex>");
      });

  py::class_<CircleParams>(m, "CircleParams")
      .def_readonly("center", &CircleParams::center)
      .def_readonly("radius", &CircleParams::radius);

  py::class_<OptimalSAAResult>(m, "OptimalSAAResult")
      .def_readonly("beta", &OptimalSAAResult::beta)
      .def_readonly("factor", &OptimalSAAResult::factor)
      .def_property_readonly("kind",
                             [](const OptimalSAAResult& r) { return to_string(r.kind); })
      .def_readonly("case_label", &OptimalSAAResult::case_label)
      .def_readonly("circle", &OptimalSAAResult::circle)
      .def("__repr__", [](const OptimalSAAResult& r) {
        return "<OptimalSAAResult factor=" + std::to_string(r.factor) + " " + r.case_label + ">";
      });

  py::class_<ConvergenceEstimate>(m, "ConvergenceEstimate")
      .def_readonly("factor", &ConvergenceEstimate::factor)
      .def_readonly("window", &ConvergenceEstimate::window)
      .def_readonly("reliable", &ConvergenceEstimate::reliable);

  // problems
  m.def(
      "generate_instance",
      [](const std::string& kind, int rows, int cols, double density, std::uint64_t seed,
         std::optional<double> reg_lambda, std::optional<double> penalty_rho, double alpha_scale,
         bool scaled_projection) {
        ProblemKind k = problem_kind_from_string(kind);
        ProblemInstance defaults = default_instance(k, seed);
        GenerateParams params;
        params.reg_lambda = reg_lambda ? reg_lambda : std::optional<double>(defaults.reg_lambda);
        params.penalty_rho =
            penalty_rho ? penalty_rho : std::optional<double>(defaults.penalty_rho);
        params.alpha_scale = alpha_scale;
        params.scaled_projection = scaled_projection;
        if (rows <= 0) rows = static_cast<int>(defaults.data_matrix.rows());
        if (cols <= 0)
          cols = k == ProblemKind::total_variation ? static_cast<int>(defaults.rhs.size())
                                                   : static_cast<int>(defaults.data_matrix.cols());
        if (density <= 0) density = defaults.density;
        return generate_instance(k, rows, cols, density, seed, params);
      },
      py::arg("kind"), py::arg("rows") = 0, py::arg("cols") = 0, py::arg("density") = 0.0,
      py::arg("seed") = 0, py::arg("reg_lambda") = std::nullopt,
      py::arg("penalty_rho") = std::nullopt, py::arg("alpha_scale") = 0.001,
      py::arg("scaled_projection") = false);
  m.def(
      "default_instance",
      [](const std::string& kind, std::uint64_t seed) {
        return default_instance(problem_kind_from_string(kind), seed);
      },
      py::arg("kind"), py::arg("seed"));
  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));
  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("prox_l1", &prox_l1, py::arg("v"), py::arg("t"));
  m.def("project_box", &project_box, py::arg("v"), py::arg("lo"), py::arg("hi"));
  m.def("project_nonneg", &project_nonneg, py::arg("v"));

  // solvers
  m.def(
      "reference_solution",
      [](const ProblemInstance& instance, double floor_tol, int max_iter) {
        FixedPointMap map = build_fpi(instance);
        return reference_solution(map, Vector::Zero(map.dimension), floor_tol, max_iter);
      },
      py::arg("instance"), py::arg("floor_tol") = 1e-15, py::arg("max_iter") = 200000);
  m.def(
      "run",
      [](const ProblemInstance& instance, const std::string& scheme, int max_iter, double tol,
         std::optional<Vector> reference, std::optional<Vector> x0) {
        FixedPointMap map = build_fpi(instance);
        Vector start = x0 ? *x0 : Vector::Zero(map.dimension);
        return run_generic(map, scheme, start, max_iter, tol, reference);
      },
      py::arg("instance"), py::arg("scheme") = "plain", py::arg("max_iter") = 5000,
      py::arg("tol") = 1e-12, py::arg("reference") = std::nullopt, py::arg("x0") = std::nullopt,
      "Run one scheme (\"plain\", \"aa<m>\", \"saa<m>:beta=b1,...\") on a problem instance");
  m.def(
      "run_map",
      [](const std::function<Vector(const Vector&)>& fn, Eigen::Index dimension,
         const std::string& scheme, const Vector& x0, int max_iter, double tol,
         std::optional<Vector> reference) {
        return run_generic(map_from_callable(fn, dimension), scheme, x0, max_iter, tol, reference);
      },
      py::arg("fn"), py::arg("dimension"), py::arg("scheme"), py::arg("x0"),
      py::arg("max_iter") = 1000, py::arg("tol") = 1e-12, py::arg("reference") = std::nullopt,
      "Accelerate an arbitrary fixed-point map given as a Python callable");
  m.def(
      "estimate_convergence_factor",
      [](const std::vector<double>& errors, int window, double accuracy_floor) {
        IterationTrace trace;
        for (size_t i = 0; i < errors.size(); ++i)
          trace.records.push_back({static_cast<int>(i), errors[i], std::nullopt, std::nullopt});
        return estimate_convergence_factor(trace, window, accuracy_floor);
      },
      py::arg("errors"), py::arg("window") = 20, py::arg("accuracy_floor") = 0.0);

  // jacobians and spectra
  m.def(
      "fd_jacobian",
      [](const ProblemInstance& instance, const Vector& x_star, double h, bool central) {
        FixedPointMap map = build_fpi(instance);
        if (h <= 0) {
          h = instance.kind == ProblemKind::reg_logistic      ? 1e-4
              : instance.kind == ProblemKind::total_variation ? 1e-5
                                                               : 1e-3;
        }
        return fd_jacobian(map, x_star, h, central);
      },
      py::arg("instance"), py::arg("x_star"), py::arg("h") = 0.0, py::arg("central") = false);
  m.def(
      "fd_jacobian_map",
      [](const std::function<Vector(const Vector&)>& fn, Eigen::Index dimension,
         const Vector& x_star, double h, bool central) {
        return fd_jacobian(map_from_callable(fn, dimension), x_star, h, central);
      },
      py::arg("fn"), py::arg("dimension"), py::arg("x_star"), py::arg("h") = 1e-5,
      py::arg("central") = false);
  m.def("analytic_jacobian", &analytic_jacobian, py::arg("instance"), py::arg("fpi_state"));
  m.def("spectrum_of", &spectrum_of, py::arg("matrix"), py::arg("imag_tolerance") = 1e-8);
  m.def("spectrum_from_eigenvalues", &spectrum_from_eigenvalues, py::arg("eigenvalues"),
        py::arg("imag_tolerance") = 1e-8);

  // coefficient theory
  m.def("lambda_roots", &lambda_roots, py::arg("mu"), py::arg("beta"));
  m.def("s_mu", &s_mu, py::arg("mu"), py::arg("beta"));
  m.def("optimal_beta_single_mu", &optimal_beta_single_mu, py::arg("mu"));
  m.def("optimal_saa1", &optimal_saa1, py::arg("spectrum"));
  m.def("circle_params", &circle_params, py::arg("beta"));
  m.def("companion_psi", &companion_psi, py::arg("q_prime"), py::arg("beta"));
  m.def("rho_saa", &rho_saa, py::arg("spectrum"), py::arg("beta"));
  m.def("brute_force_sweep", &brute_force_sweep, py::arg("spectrum"), py::arg("m"),
        py::arg("lo") = -1.0, py::arg("hi") = 1.0, py::arg("step") = 0.05, py::arg("threads") = 0);

  // experiment pipeline
  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        ExperimentSummary summary = run_experiment(config_from_text(config_text));
        return summary_to_text(summary);
      },
      py::arg("config_text"),
      "Run the full pipeline from config text; returns the summary text, artifacts land in "
      "the configured out_dir");

  m.attr("__version__") = "0.1.0";
}
