#include "aaadmm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace aaadmm {

namespace {

std::string status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::max_iterations: return "max_iterations";
    case TerminalStatus::diverged: return "diverged";
  }
  throw std::logic_error("unknown TerminalStatus");
}

TerminalStatus status_from_name(const std::string& s) {
  if (s == "converged") return TerminalStatus::converged;
  if (s == "max_iterations") return TerminalStatus::max_iterations;
  if (s == "diverged") return TerminalStatus::diverged;
  throw std::runtime_error("unknown status '" + s + "'");
}

std::string provenance_name(BetaProvenance p) {
  switch (p) {
    case BetaProvenance::closed_form: return "closed_form";
    case BetaProvenance::lower_bound_only: return "lower_bound_only";
    case BetaProvenance::grid_sweep: return "grid_sweep";
    case BetaProvenance::user_supplied: return "user_supplied";
  }
  throw std::logic_error("unknown BetaProvenance");
}

BetaProvenance provenance_from_name(const std::string& s) {
  if (s == "closed_form") return BetaProvenance::closed_form;
  if (s == "lower_bound_only") return BetaProvenance::lower_bound_only;
  if (s == "grid_sweep") return BetaProvenance::grid_sweep;
  if (s == "user_supplied") return BetaProvenance::user_supplied;
  throw std::runtime_error("unknown provenance '" + s + "'");
}

double default_fd_step(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::reg_logistic: return 1e-4;
    case ProblemKind::total_variation: return 1e-5;
    default: return 1e-3;
  }
}

std::string fmt_optional(double v) {
  return std::isfinite(v) ? detail::fmt_double(v) : std::string("none");
}

double parse_optional(const std::string& s) {
  return s == "none" ? std::numeric_limits<double>::quiet_NaN() : detail::parse_double(s);
}

std::string join_beta(const Eigen::VectorXd& beta) {
  std::string out;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (i) out += ' ';
    out += detail::fmt_double(beta[i]);
  }
  return out;
}

Eigen::VectorXd parse_beta_list(const std::string& text, char sep) {
  auto parts = detail::split(text, sep);
  std::vector<double> vals;
  for (auto& p : parts) {
    std::string s = detail::strip(p);
    if (!s.empty()) vals.push_back(detail::parse_double(s));
  }
  Eigen::VectorXd beta(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) beta[static_cast<Eigen::Index>(i)] = vals[i];
  return beta;
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + stage + "': " + e.what());
  }
}

// Local per-coordinate refinement of a coarse grid optimum.
OptimalSAAResult refine_sweep(const Spectrum& spectrum, const OptimalSAAResult& coarse,
                              double coarse_step, double lo, double hi) {
  const int m = static_cast<int>(coarse.beta.size());
  const double step = coarse_step / 5.0;
  std::vector<std::vector<double>> axes(m);
  for (int i = 0; i < m; ++i) {
    double a = std::max(lo, coarse.beta[i] - coarse_step);
    double b = std::min(hi, coarse.beta[i] + coarse_step);
    for (int k = 0;; ++k) {
      double v = a + k * step;
      if (v > b + 1e-9 * step) break;
      axes[i].push_back(std::min(v, b));
    }
  }
  OptimalSAAResult best = coarse;
  Eigen::VectorXd beta(m);
  std::vector<size_t> idx(m, 0);
  while (true) {
    for (int i = 0; i < m; ++i) beta[i] = axes[i][idx[i]];
    double factor = rho_saa(spectrum, beta);
    if (factor < best.factor) {
      best.factor = factor;
      best.beta = beta;
    }
    int pos = m - 1;
    while (pos >= 0 && ++idx[pos] == axes[pos].size()) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return best;
}

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plot the trace and spectrum CSV files sitting next to this script."""
import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

plt.figure(figsize=(7, 5))
for path in sorted(glob.glob(os.path.join(here, "trace_*.csv"))):
    name = os.path.basename(path)[len("trace_"):-len(".csv")]
    ks, errs = [], []
    with open(path) as f:
        for row in csv.DictReader(f):
            ks.append(int(row["k"]))
            errs.append(float(row["error_norm"]))
    plt.semilogy(ks, errs, label=name)
plt.xlabel("iteration")
plt.ylabel("error norm")
plt.legend()
plt.grid(True, which="both", alpha=0.3)
plt.tight_layout()
plt.savefig(os.path.join(here, "traces.png"), dpi=150)

plt.figure(figsize=(6, 6))
for path in sorted(glob.glob(os.path.join(here, "spectrum_*.csv"))):
    name = os.path.basename(path)[len("spectrum_"):-len(".csv")]
    re, im = [], []
    with open(path) as f:
        for row in csv.DictReader(f):
            re.append(float(row["re"]))
            im.append(float(row["im"]))
    plt.scatter(re, im, s=12, label=name, alpha=0.7)
plt.axhline(0, color="k", lw=0.5)
plt.axvline(0, color="k", lw=0.5)
plt.gca().set_aspect("equal")
plt.xlabel("Re")
plt.ylabel("Im")
plt.legend()
plt.tight_layout()
plt.savefig(os.path.join(here, "spectra.png"), dpi=150)
print("wrote traces.png and spectra.png to", here)
)PY";

}  // namespace

std::string SchemeSpec::name() const {
  switch (kind) {
    case Kind::plain: return "plain";
    case Kind::aa: return "aa" + std::to_string(m);
    case Kind::saa: {
      std::string base = "saa" + std::to_string(m);
      switch (source) {
        case BetaSource::theory: return base + "_theory";
        case BetaSource::sweep: return base + "_sweep";
        case BetaSource::explicit_beta: return base + "_beta";
      }
    }
  }
  throw std::logic_error("SchemeSpec::name: bad spec");
}

SchemeSpec parse_scheme(const std::string& text) {
  std::string s = detail::strip(text);
  SchemeSpec spec;
  if (s == "plain") return spec;

  auto parse_m = [&](size_t prefix_len, size_t end) {
    std::string digits = s.substr(prefix_len, end - prefix_len);
    if (digits.empty()) throw std::invalid_argument("parse_scheme: missing window size in '" + s + "'");
    return std::stoi(digits);
  };

  if (s.rfind("aa", 0) == 0) {
    spec.kind = SchemeSpec::Kind::aa;
    spec.m = parse_m(2, s.size());
    if (spec.m < 0) throw std::invalid_argument("parse_scheme: AA window must be >= 0");
    return spec;
  }
  if (s.rfind("saa", 0) == 0) {
    spec.kind = SchemeSpec::Kind::saa;
    size_t colon = s.find(':');
    spec.m = parse_m(3, colon == std::string::npos ? s.size() : colon);
    if (spec.m < 1) throw std::invalid_argument("parse_scheme: sAA window must be >= 1");
    if (colon == std::string::npos) {
      spec.source = spec.m == 1 ? SchemeSpec::BetaSource::theory : SchemeSpec::BetaSource::sweep;
      return spec;
    }
    std::string src = s.substr(colon + 1);
    if (src == "theory") {
      spec.source = SchemeSpec::BetaSource::theory;
    } else if (src == "sweep") {
      spec.source = SchemeSpec::BetaSource::sweep;
    } else if (src.rfind("beta=", 0) == 0) {
      spec.source = SchemeSpec::BetaSource::explicit_beta;
      spec.explicit_beta = parse_beta_list(src.substr(5), ',');
      if (spec.explicit_beta.size() != spec.m)
        throw std::invalid_argument("parse_scheme: beta list length != m in '" + s + "'");
    } else {
      throw std::invalid_argument("parse_scheme: unknown beta source in '" + s + "'");
    }
    return spec;
  }
  throw std::invalid_argument("parse_scheme: unknown scheme '" + s + "'");
}

ExperimentConfig default_experiment_config(ProblemKind problem, std::uint64_t seed,
                                           const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  std::vector<std::string> names = {"plain", "aa1", "aa2", "saa1:theory", "saa2:sweep"};
  if (problem == ProblemKind::ridge || problem == ProblemKind::reg_logistic) {
    names.push_back("aa3");
    names.push_back("saa3:sweep");
  }
  for (const auto& n : names) cfg.schemes.push_back(parse_scheme(n));
  return cfg;
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "aaadmm-config v1\n";
  out << "problem = " << to_string(c.problem) << '\n';
  out << "seed = " << c.seed << '\n';
  out << "out_dir = " << c.out_dir << '\n';
  if (c.rows > 0) out << "rows = " << c.rows << '\n';
  if (c.cols > 0) out << "cols = " << c.cols << '\n';
  if (c.density > 0) out << "density = " << detail::fmt_double(c.density) << '\n';
  if (std::isfinite(c.reg_lambda)) out << "reg_lambda = " << detail::fmt_double(c.reg_lambda) << '\n';
  if (std::isfinite(c.penalty_rho))
    out << "penalty_rho = " << detail::fmt_double(c.penalty_rho) << '\n';
  out << "alpha_scale = " << detail::fmt_double(c.alpha_scale) << '\n';
  out << "scaled_projection = " << (c.scaled_projection ? 1 : 0) << '\n';
  out << "schemes = ";
  for (size_t i = 0; i < c.schemes.size(); ++i) {
    if (i) out << ", ";
    const auto& s = c.schemes[i];
    if (s.kind == SchemeSpec::Kind::plain) {
      out << "plain";
    } else if (s.kind == SchemeSpec::Kind::aa) {
      out << "aa" << s.m;
    } else {
      out << "saa" << s.m;
      if (s.source == SchemeSpec::BetaSource::theory) out << ":theory";
      if (s.source == SchemeSpec::BetaSource::sweep) out << ":sweep";
      if (s.source == SchemeSpec::BetaSource::explicit_beta) {
        out << ":beta=";
        for (Eigen::Index j = 0; j < s.explicit_beta.size(); ++j) {
          if (j) out << ',';
          out << detail::fmt_double(s.explicit_beta[j]);
        }
      }
    }
  }
  out << '\n';
  out << "max_iter = " << c.max_iter << '\n';
  out << "tol = " << detail::fmt_double(c.tol) << '\n';
  out << "fd_step = " << (c.fd_step > 0 ? detail::fmt_double(c.fd_step) : "auto") << '\n';
  out << "sweep_lo = " << detail::fmt_double(c.sweep_lo) << '\n';
  out << "sweep_hi = " << detail::fmt_double(c.sweep_hi) << '\n';
  out << "sweep_step = " << detail::fmt_double(c.sweep_step) << '\n';
  out << "sweep3_step = " << detail::fmt_double(c.sweep3_step) << '\n';
  out << "sweep3_refine = " << (c.sweep3_refine ? 1 : 0) << '\n';
  out << "window = " << c.window << '\n';
  out << "reference_floor_tol = " << detail::fmt_double(c.reference_floor_tol) << '\n';
  out << "reference_max_iter = " << c.reference_max_iter << '\n';
  return out.str();
}

ExperimentConfig config_from_text(const std::string& text) {
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::strip(lines[0]) != "aaadmm-config v1")
    throw std::runtime_error("config: missing 'aaadmm-config v1' header");

  ExperimentConfig c;
  bool have_problem = false, have_seed = false, have_out = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string s = detail::strip(lines[i]);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config: expected 'key = value': " + s);
    std::string key = detail::strip(s.substr(0, eq));
    std::string value = detail::strip(s.substr(eq + 1));

    if (key == "problem") {
      c.problem = problem_kind_from_string(value);
      have_problem = true;
    } else if (key == "seed") {
      c.seed = std::stoull(value);
      have_seed = true;
    } else if (key == "out_dir") {
      c.out_dir = value;
      have_out = true;
    } else if (key == "rows") {
      c.rows = std::stoi(value);
    } else if (key == "cols") {
      c.cols = std::stoi(value);
    } else if (key == "density") {
      c.density = detail::parse_double(value);
    } else if (key == "reg_lambda") {
      c.reg_lambda = detail::parse_double(value);
    } else if (key == "penalty_rho") {
      c.penalty_rho = detail::parse_double(value);
    } else if (key == "alpha_scale") {
      c.alpha_scale = detail::parse_double(value);
    } else if (key == "scaled_projection") {
      c.scaled_projection = detail::parse_double(value) != 0;
    } else if (key == "schemes") {
      c.schemes.clear();
      // explicit beta lists use commas too; re-join numeric continuation
      // pieces with the preceding beta= scheme before parsing
      std::vector<std::string> joined;
      for (const auto& part : detail::split(value, ',')) {
        std::string piece = detail::strip(part);
        if (piece.empty()) continue;
        bool numeric = piece.find_first_not_of("0123456789+-.eE") == std::string::npos;
        if (numeric && !joined.empty() && joined.back().find("beta=") != std::string::npos) {
          joined.back() += "," + piece;
        } else {
          joined.push_back(piece);
        }
      }
      for (const auto& name : joined) c.schemes.push_back(parse_scheme(name));
    } else if (key == "max_iter") {
      c.max_iter = std::stoi(value);
    } else if (key == "tol") {
      c.tol = detail::parse_double(value);
    } else if (key == "fd_step") {
      c.fd_step = value == "auto" ? 0.0 : detail::parse_double(value);
    } else if (key == "sweep_lo") {
      c.sweep_lo = detail::parse_double(value);
    } else if (key == "sweep_hi") {
      c.sweep_hi = detail::parse_double(value);
    } else if (key == "sweep_step") {
      c.sweep_step = detail::parse_double(value);
    } else if (key == "sweep3_step") {
      c.sweep3_step = detail::parse_double(value);
    } else if (key == "sweep3_refine") {
      c.sweep3_refine = detail::parse_double(value) != 0;
    } else if (key == "window") {
      c.window = std::stoi(value);
    } else if (key == "reference_floor_tol") {
      c.reference_floor_tol = detail::parse_double(value);
    } else if (key == "reference_max_iter") {
      c.reference_max_iter = std::stoi(value);
    } else {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
  if (!have_problem) throw std::runtime_error("config: missing 'problem'");
  if (!have_seed) throw std::runtime_error("config: missing 'seed'");
  if (!have_out) throw std::runtime_error("config: missing 'out_dir'");
  if (c.schemes.empty()) {
    ExperimentConfig defaults = default_experiment_config(c.problem, c.seed, c.out_dir);
    c.schemes = defaults.schemes;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_text(detail::read_file(path));
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  if (config.out_dir.empty()) throw std::invalid_argument("run_experiment: out_dir is required");
  fs::create_directories(config.out_dir);
  auto path_in_out = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };

  ExperimentSummary summary;
  summary.problem = config.problem;
  summary.seed = config.seed;
  summary.out_dir = config.out_dir;

  // generate
  ProblemInstance instance = run_stage("generate", [&] {
    ProblemInstance defaults = default_instance(config.problem, config.seed);
    GenerateParams params;
    params.reg_lambda = std::isfinite(config.reg_lambda)
                            ? std::optional<double>(config.reg_lambda)
                            : std::optional<double>(defaults.reg_lambda);
    params.penalty_rho = std::isfinite(config.penalty_rho)
                             ? std::optional<double>(config.penalty_rho)
                             : std::optional<double>(defaults.penalty_rho);
    params.alpha_scale = config.alpha_scale;
    params.scaled_projection = config.scaled_projection;
    int rows = config.rows > 0 ? config.rows : static_cast<int>(defaults.data_matrix.rows());
    int cols = config.cols > 0 ? config.cols
               : config.problem == ProblemKind::total_variation
                   ? static_cast<int>(defaults.rhs.size())
                   : static_cast<int>(defaults.data_matrix.cols());
    double density = config.density > 0 ? config.density : defaults.density;
    return generate_instance(config.problem, rows, cols, density, config.seed, params);
  });
  summary.rows = static_cast<int>(instance.data_matrix.rows());
  summary.cols = config.problem == ProblemKind::total_variation
                     ? static_cast<int>(instance.rhs.size())
                     : static_cast<int>(instance.data_matrix.cols());
  summary.density = instance.density;
  summary.reg_lambda = instance.reg_lambda;
  summary.penalty_rho = instance.penalty_rho;
  summary.smoothing_alpha = instance.smoothing_alpha;
  summary.scaled_projection = instance.scaled_projection;
  summary.instance_file = "instance.txt";
  save_instance(instance, path_in_out(summary.instance_file));

  FixedPointMap map = build_fpi(instance);
  const Vector x0 = Vector::Zero(map.dimension);

  // reference
  Vector reference = run_stage("reference", [&] {
    return reference_solution(map, x0, config.reference_floor_tol, config.reference_max_iter);
  });
  const double accuracy_floor =
      std::max((map.evaluate(reference) - reference).norm(),
               50.0 * std::numeric_limits<double>::epsilon() * reference.norm());

  // jacobian
  Matrix jac = run_stage("jacobian", [&] {
    if (config.problem == ProblemKind::ridge && config.fd_step <= 0) {
      summary.fd_step_used = 0.0;
      return analytic_jacobian(instance, reference);
    }
    double h = config.fd_step > 0 ? config.fd_step : default_fd_step(config.problem);
    summary.fd_step_used = h;
    return fd_jacobian(map, reference, h);
  });

  // spectrum
  Spectrum spectrum = run_stage("spectrum", [&] { return spectrum_of(jac); });
  summary.rho_q = spectrum.spectral_radius;
  summary.spectrum_real = spectrum.is_real();
  if (spectrum.is_real()) {
    summary.sigma_min = spectrum.real_stats().sigma_min;
    summary.sigma_max = spectrum.real_stats().sigma_max;
  } else {
    summary.mu_plus = spectrum.complex_stats().mu_plus;
  }
  summary.spectrum_file = "spectrum_q.csv";
  write_spectrum_csv(spectrum, path_in_out(summary.spectrum_file));

  // coefficient analysis (branch label for the summary)
  run_stage("analysis", [&] {
    try {
      summary.branch = optimal_saa1(spectrum).case_label;
    } catch (const std::runtime_error&) {
      summary.branch = "out_of_domain";
    }
    return 0;
  });

  // resolve every sAA plan before any run starts
  std::vector<SchemeOutcome> outcomes;
  for (const auto& spec : config.schemes) {
    SchemeOutcome out;
    out.spec = spec;
    if (spec.kind == SchemeSpec::Kind::plain) {
      out.predicted_factor = spectrum.spectral_radius;
    } else if (spec.kind == SchemeSpec::Kind::saa) {
      run_stage("analysis", [&] {
        if (spec.source == SchemeSpec::BetaSource::theory) {
          if (spec.m != 1)
            throw std::invalid_argument("theory beta source is defined for sAA(1) only");
          OptimalSAAResult res = optimal_saa1(spectrum);
          out.plan = plan_from_result(res);
          out.branch = res.case_label;
        } else if (spec.source == SchemeSpec::BetaSource::sweep) {
          double step = spec.m == 3 ? config.sweep3_step : config.sweep_step;
          OptimalSAAResult res =
              brute_force_sweep(spectrum, spec.m, config.sweep_lo, config.sweep_hi, step);
          if (spec.m == 3 && config.sweep3_refine) {
            res = refine_sweep(spectrum, res, step, config.sweep_lo, config.sweep_hi);
            out.sweep_refined = true;
          }
          out.plan = plan_from_result(res);
          out.branch = res.case_label;
        } else {
          SAAPlan plan;
          plan.m = spec.m;
          plan.beta = spec.explicit_beta;
          plan.predicted_factor = rho_saa(spectrum, spec.explicit_beta);
          plan.provenance = BetaProvenance::user_supplied;
          out.plan = plan;
        }
        out.predicted_factor = out.plan->predicted_factor;
        return 0;
      });
      // mapped spectrum of the companion iteration matrix
      std::vector<std::complex<double>> mapped;
      for (const auto& mu : spectrum.eigenvalues)
        for (const auto& lam : lambda_roots(mu, out.plan->beta)) mapped.push_back(lam);
      out.psi_spectrum_file = "spectrum_psi_" + spec.name() + ".csv";
      write_spectrum_csv(spectrum_from_eigenvalues(std::move(mapped)),
                         path_in_out(out.psi_spectrum_file));
    }
    outcomes.push_back(std::move(out));
  }

  // runs
  for (auto& out : outcomes) {
    run_stage("solve", [&] {
      Scheme scheme;
      if (out.spec.kind == SchemeSpec::Kind::plain)
        scheme = PlainScheme{};
      else if (out.spec.kind == SchemeSpec::Kind::aa)
        scheme = AAScheme{out.spec.m};
      else
        scheme = SAAScheme{*out.plan};
      IterationTrace trace =
          run_accelerated(map, x0, scheme, config.max_iter, config.tol, reference);
      ConvergenceEstimate est = estimate_convergence_factor(trace, config.window, accuracy_floor);
      out.measured_factor = est.factor;
      out.measured_reliable = est.reliable;
      out.iterations = trace.records.empty() ? 0 : trace.records.back().k;
      out.status = trace.terminal_status;
      out.trace_file = "trace_" + out.spec.name() + ".csv";
      write_trace_csv(trace, path_in_out(out.trace_file));
      return 0;
    });
  }
  summary.schemes = std::move(outcomes);

  // report
  run_stage("report", [&] {
    summary.plot_script = "plot_results.py";
    detail::write_file(path_in_out(summary.plot_script), kPlotScript);
    summary.summary_file = "summary.txt";
    detail::write_file(path_in_out(summary.summary_file), summary_to_text(summary));
    return 0;
  });
  return summary;
}

std::string summary_to_text(const ExperimentSummary& s) {
  std::ostringstream out;
  out << "aaadmm-summary v1\n";
  out << "problem = " << to_string(s.problem) << '\n';
  out << "seed = " << s.seed << '\n';
  out << "rows = " << s.rows << '\n';
  out << "cols = " << s.cols << '\n';
  out << "density = " << detail::fmt_double(s.density) << '\n';
  out << "reg_lambda = " << detail::fmt_double(s.reg_lambda) << '\n';
  out << "penalty_rho = " << detail::fmt_double(s.penalty_rho) << '\n';
  out << "smoothing_alpha = " << detail::fmt_double(s.smoothing_alpha) << '\n';
  out << "scaled_projection = " << (s.scaled_projection ? 1 : 0) << '\n';
  out << "fd_step = " << (s.fd_step_used > 0 ? detail::fmt_double(s.fd_step_used) : "analytic")
      << '\n';
  out << "rho_q = " << detail::fmt_double(s.rho_q) << '\n';
  out << "classification = " << (s.spectrum_real ? "real" : "complex") << '\n';
  if (s.spectrum_real) {
    out << "sigma_min = " << detail::fmt_double(s.sigma_min) << '\n';
    out << "sigma_max = " << detail::fmt_double(s.sigma_max) << '\n';
  } else {
    out << "mu_plus = " << (s.mu_plus ? detail::fmt_double(*s.mu_plus) : "none") << '\n';
  }
  out << "branch = " << s.branch << '\n';
  out << "instance_file = " << s.instance_file << '\n';
  out << "spectrum_file = " << s.spectrum_file << '\n';
  if (!s.plot_script.empty()) out << "plot_script = " << s.plot_script << '\n';
  for (const auto& sc : s.schemes) {
    out << "scheme " << sc.spec.name() << '\n';
    if (sc.plan) {
      out << "  beta = " << join_beta(sc.plan->beta) << '\n';
      out << "  provenance = " << provenance_name(sc.plan->provenance) << '\n';
    }
    if (!sc.branch.empty()) out << "  branch = " << sc.branch << '\n';
    if (sc.sweep_refined) out << "  sweep_refined = 1\n";
    out << "  predicted_factor = " << fmt_optional(sc.predicted_factor) << '\n';
    out << "  measured_factor = " << fmt_optional(sc.measured_factor) << '\n';
    out << "  measured_reliable = " << (sc.measured_reliable ? 1 : 0) << '\n';
    out << "  iterations = " << sc.iterations << '\n';
    out << "  status = " << status_name(sc.status) << '\n';
    out << "  trace_file = " << sc.trace_file << '\n';
    if (!sc.psi_spectrum_file.empty())
      out << "  psi_spectrum_file = " << sc.psi_spectrum_file << '\n';
  }
  out << "end\n";
  return out.str();
}

ExperimentSummary summary_from_text(const std::string& text) {
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::strip(lines[0]) != "aaadmm-summary v1")
    throw std::runtime_error("summary: missing 'aaadmm-summary v1' header");

  ExperimentSummary s;
  SchemeOutcome* current = nullptr;
  bool ended = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string line = detail::strip(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    if (line == "end") {
      ended = true;
      break;
    }
    if (line.rfind("scheme ", 0) == 0) {
      SchemeOutcome out;
      std::string name = detail::strip(line.substr(7));
      // reconstruct the scheme spec from the stored name
      auto us = name.find('_');
      if (us != std::string::npos && name.substr(us + 1) == "beta") {
        out.spec.kind = SchemeSpec::Kind::saa;
        out.spec.source = SchemeSpec::BetaSource::explicit_beta;
        out.spec.m = std::stoi(name.substr(3, us - 3));
      } else if (us != std::string::npos) {
        out.spec = parse_scheme(name.substr(0, us) + ":" + name.substr(us + 1));
      } else {
        out.spec = parse_scheme(name);
      }
      s.schemes.push_back(std::move(out));
      current = &s.schemes.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("summary: expected 'key = value': " + line);
    std::string key = detail::strip(line.substr(0, eq));
    std::string value = detail::strip(line.substr(eq + 1));
    if (current) {
      if (key == "beta") {
        if (!current->plan) current->plan.emplace();
        current->plan->beta = parse_beta_list(value, ' ');
        current->plan->m = static_cast<int>(current->plan->beta.size());
        if (current->spec.source == SchemeSpec::BetaSource::explicit_beta)
          current->spec.explicit_beta = current->plan->beta;
      } else if (key == "provenance") {
        if (!current->plan) current->plan.emplace();
        current->plan->provenance = provenance_from_name(value);
      } else if (key == "branch") {
        current->branch = value;
      } else if (key == "sweep_refined") {
        current->sweep_refined = value == "1";
      } else if (key == "predicted_factor") {
        current->predicted_factor = parse_optional(value);
        if (current->plan) current->plan->predicted_factor = current->predicted_factor;
      } else if (key == "measured_factor") {
        current->measured_factor = parse_optional(value);
      } else if (key == "measured_reliable") {
        current->measured_reliable = value == "1";
      } else if (key == "iterations") {
        current->iterations = std::stoi(value);
      } else if (key == "status") {
        current->status = status_from_name(value);
      } else if (key == "trace_file") {
        current->trace_file = value;
      } else if (key == "psi_spectrum_file") {
        current->psi_spectrum_file = value;
      } else {
        throw std::runtime_error("summary: unknown scheme key '" + key + "'");
      }
      continue;
    }
    if (key == "problem") {
      s.problem = problem_kind_from_string(value);
    } else if (key == "seed") {
      s.seed = std::stoull(value);
    } else if (key == "rows") {
      s.rows = std::stoi(value);
    } else if (key == "cols") {
      s.cols = std::stoi(value);
    } else if (key == "density") {
      s.density = detail::parse_double(value);
    } else if (key == "reg_lambda") {
      s.reg_lambda = detail::parse_double(value);
    } else if (key == "penalty_rho") {
      s.penalty_rho = detail::parse_double(value);
    } else if (key == "smoothing_alpha") {
      s.smoothing_alpha = detail::parse_double(value);
    } else if (key == "scaled_projection") {
      s.scaled_projection = value == "1";
    } else if (key == "fd_step") {
      s.fd_step_used = value == "analytic" ? 0.0 : detail::parse_double(value);
    } else if (key == "rho_q") {
      s.rho_q = detail::parse_double(value);
    } else if (key == "classification") {
      s.spectrum_real = value == "real";
    } else if (key == "sigma_min") {
      s.sigma_min = detail::parse_double(value);
    } else if (key == "sigma_max") {
      s.sigma_max = detail::parse_double(value);
    } else if (key == "mu_plus") {
      if (value != "none") s.mu_plus = detail::parse_double(value);
    } else if (key == "branch") {
      s.branch = value;
    } else if (key == "instance_file") {
      s.instance_file = value;
    } else if (key == "spectrum_file") {
      s.spectrum_file = value;
    } else if (key == "plot_script") {
      s.plot_script = value;
    } else {
      throw std::runtime_error("summary: unknown key '" + key + "'");
    }
  }
  if (!ended) throw std::runtime_error("summary: missing 'end'");
  return s;
}

ExperimentSummary load_summary(const std::string& path) {
  ExperimentSummary s = summary_from_text(detail::read_file(path));
  s.out_dir = std::filesystem::path(path).parent_path().string();
  s.summary_file = std::filesystem::path(path).filename().string();
  return s;
}

std::string compare_report(const std::vector<ExperimentSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("compare_report: need at least one summary");
  std::ostringstream out;
  out << "problem,scheme,rho_q,beta,predicted_factor,measured_factor,iterations\n";
  for (const auto& s : summaries) {
    for (const auto& sc : s.schemes) {
      out << to_string(s.problem) << ',' << sc.spec.name() << ','
          << detail::fmt_double(s.rho_q) << ',';
      if (sc.plan) {
        for (Eigen::Index i = 0; i < sc.plan->beta.size(); ++i) {
          if (i) out << ';';
          out << detail::fmt_double(sc.plan->beta[i]);
        }
      }
      out << ',' << fmt_optional(sc.predicted_factor) << ',' << fmt_optional(sc.measured_factor)
          << ',' << sc.iterations << '\n';
    }
  }
  return out.str();
}

}  // namespace aaadmm
