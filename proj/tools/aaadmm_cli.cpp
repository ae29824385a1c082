// Experiment harness for the ADMM / Anderson-acceleration library:
// generates problem instances, runs solver comparisons, extracts spectra,
// computes optimal stationary coefficients and aggregates result tables.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aaadmm/experiment.hpp"

using namespace aaadmm;

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::VectorXd to_eigen(const std::vector<double>& vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADMM fixed-point solvers with Anderson acceleration and optimal stationary "
               "coefficient analysis"};
  app.require_subcommand(1);

  // generate -------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Generate a problem instance file");
  std::string gen_kind, gen_out = "instance.txt";
  int gen_rows = 0, gen_cols = 0;
  double gen_density = 0.0, gen_lambda = -1.0, gen_rho = -1.0, gen_alpha_scale = 0.001;
  std::uint64_t gen_seed = 0;
  bool gen_scaled = false;
  gen->add_option("--kind", gen_kind, "ridge|reg_logistic|total_variation|lasso|nnls|box_logistic|scalar_l1_demo")
      ->required();
  gen->add_option("--seed", gen_seed, "RNG seed")->required();
  gen->add_option("--rows", gen_rows, "data matrix rows (default per kind)");
  gen->add_option("--cols", gen_cols, "data matrix cols / signal length (default per kind)");
  gen->add_option("--density", gen_density, "sparse fill density in (0,1]");
  gen->add_option("--reg-lambda", gen_lambda, "regularization parameter");
  gen->add_option("--penalty-rho", gen_rho, "augmented Lagrangian penalty");
  gen->add_option("--alpha-scale", gen_alpha_scale, "total variation alpha = scale * ||y||_inf");
  gen->add_flag("--scaled-projection", gen_scaled, "use the (1/rho)-scaled projection z-step");
  gen->add_option("-o,--output", gen_out, "instance file path");

  // solve ----------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "Run one scheme on an instance and write its trace");
  std::string solve_instance, solve_scheme = "plain", solve_out = "trace.csv";
  int solve_max_iter = 5000;
  double solve_tol = 1e-12, solve_ref_floor = 1e-15;
  bool solve_no_reference = false;
  solve->add_option("--instance", solve_instance, "instance file")->required();
  solve->add_option("--scheme", solve_scheme,
                    "plain | aa<m> | saa<m>[:theory|:sweep|:beta=b1,...] (theory/sweep resolve "
                    "via the instance spectrum)");
  solve->add_option("--max-iter", solve_max_iter);
  solve->add_option("--tol", solve_tol);
  solve->add_option("--reference-floor", solve_ref_floor, "step-norm floor for the reference run");
  solve->add_flag("--no-reference", solve_no_reference,
                  "record step norms instead of errors against a reference solution");
  solve->add_option("-o,--output", solve_out, "trace CSV path");

  // spectrum ---------------------------------------------------------------
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Jacobian spectrum at the fixed point");
  std::string spec_instance, spec_out = "spectrum.csv";
  double spec_fd_step = 0.0;
  bool spec_central = false;
  spectrum_cmd->add_option("--instance", spec_instance, "instance file")->required();
  spectrum_cmd->add_option("--fd-step", spec_fd_step,
                           "finite difference step (0 = per-problem default; ridge analytic)");
  spectrum_cmd->add_flag("--central", spec_central, "central differences (robustness check)");
  spectrum_cmd->add_option("-o,--output", spec_out, "spectrum CSV path");

  // optimal-beta -----------------------------------------------------------
  auto* beta_cmd = app.add_subcommand("optimal-beta",
                                      "Optimal stationary window-1 coefficient from a spectrum");
  std::string beta_spectrum;
  std::string beta_out;
  beta_cmd->add_option("--spectrum", beta_spectrum, "spectrum CSV (re,im)")->required();
  beta_cmd->add_option("-o,--output", beta_out, "write the analysis summary here as well");

  // sweep ------------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "Brute-force coefficient grid search");
  std::string sweep_spectrum, sweep_out;
  int sweep_m = 2;
  double sweep_lo = -1.0, sweep_hi = 1.0, sweep_step = 0.05;
  sweep_cmd->add_option("--spectrum", sweep_spectrum, "spectrum CSV (re,im)")->required();
  sweep_cmd->add_option("--m", sweep_m, "window size (2 or 3)");
  sweep_cmd->add_option("--lo", sweep_lo);
  sweep_cmd->add_option("--hi", sweep_hi);
  sweep_cmd->add_option("--step", sweep_step);
  sweep_cmd->add_option("-o,--output", sweep_out, "write the analysis summary here as well");

  // experiment ---------------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("experiment", "Full pipeline from a config file");
  std::string exp_config;
  exp_cmd->add_option("--config", exp_config, "experiment config file")->required();

  // report -------------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "Aggregate summaries into a CSV table");
  std::vector<std::string> report_summaries;
  std::string report_out = "report.csv";
  report_cmd->add_option("summaries", report_summaries, "summary.txt files")->required();
  report_cmd->add_option("-o,--output", report_out, "report CSV path");

  CLI11_PARSE(app, argc, argv);

  std::string stage = "setup";
  try {
    if (*gen) {
      stage = "generate";
      ProblemKind kind = problem_kind_from_string(gen_kind);
      ProblemInstance defaults = default_instance(kind, gen_seed);
      GenerateParams params;
      if (gen_lambda >= 0) params.reg_lambda = gen_lambda;
      if (gen_rho > 0) params.penalty_rho = gen_rho;
      params.alpha_scale = gen_alpha_scale;
      params.scaled_projection = gen_scaled;
      int rows = gen_rows > 0 ? gen_rows : static_cast<int>(defaults.data_matrix.rows());
      int cols = gen_cols > 0 ? gen_cols
                 : kind == ProblemKind::total_variation
                     ? static_cast<int>(defaults.rhs.size())
                     : static_cast<int>(defaults.data_matrix.cols());
      double density = gen_density > 0 ? gen_density : defaults.density;
      ProblemInstance inst = generate_instance(kind, rows, cols, density, gen_seed, params);
      save_instance(inst, gen_out);
      std::printf("wrote %s\n", gen_out.c_str());
      return 0;
    }

    if (*solve) {
      stage = "load";
      ProblemInstance inst = load_instance(solve_instance);
      FixedPointMap map = build_fpi(inst);
      Vector x0 = Vector::Zero(map.dimension);

      std::optional<Vector> reference;
      if (!solve_no_reference) {
        stage = "reference";
        reference = reference_solution(map, x0, solve_ref_floor, 200000);
      }

      stage = "scheme";
      SchemeSpec spec = parse_scheme(solve_scheme);
      Scheme scheme = PlainScheme{};
      if (spec.kind == SchemeSpec::Kind::aa) {
        scheme = AAScheme{spec.m};
      } else if (spec.kind == SchemeSpec::Kind::saa) {
        SAAPlan plan;
        plan.m = spec.m;
        if (spec.source == SchemeSpec::BetaSource::explicit_beta) {
          plan.beta = spec.explicit_beta;
          plan.provenance = BetaProvenance::user_supplied;
        } else {
          if (!reference)
            throw std::runtime_error("theory/sweep beta sources need the reference solution");
          double h = inst.kind == ProblemKind::reg_logistic     ? 1e-4
                     : inst.kind == ProblemKind::total_variation ? 1e-5
                                                                  : 1e-3;
          Matrix jac = inst.kind == ProblemKind::ridge ? analytic_jacobian(inst, *reference)
                                                       : fd_jacobian(map, *reference, h);
          Spectrum spectrum = spectrum_of(jac);
          OptimalSAAResult res = spec.source == SchemeSpec::BetaSource::theory
                                     ? optimal_saa1(spectrum)
                                     : brute_force_sweep(spectrum, spec.m, -1.0, 1.0,
                                                         spec.m == 3 ? 0.1 : 0.05);
          plan = plan_from_result(res);
          std::printf("%s", analysis_summary(spectrum, res).c_str());
        }
        scheme = SAAScheme{plan};
      }

      stage = "solve";
      IterationTrace trace = run_accelerated(map, x0, scheme, solve_max_iter, solve_tol, reference);
      write_trace_csv(trace, solve_out);
      std::printf("wrote %s (%zu records, status %s)\n", solve_out.c_str(), trace.records.size(),
                  trace.terminal_status == TerminalStatus::converged      ? "converged"
                  : trace.terminal_status == TerminalStatus::max_iterations ? "max_iterations"
                                                                            : "diverged");
      return 0;
    }

    if (*spectrum_cmd) {
      stage = "load";
      ProblemInstance inst = load_instance(spec_instance);
      FixedPointMap map = build_fpi(inst);
      stage = "reference";
      Vector ref = reference_solution(map, Vector::Zero(map.dimension), 1e-15, 200000);
      stage = "jacobian";
      Matrix jac;
      if (inst.kind == ProblemKind::ridge && spec_fd_step <= 0 && !spec_central) {
        jac = analytic_jacobian(inst, ref);
      } else {
        double h = spec_fd_step > 0                             ? spec_fd_step
                   : inst.kind == ProblemKind::reg_logistic     ? 1e-4
                   : inst.kind == ProblemKind::total_variation  ? 1e-5
                                                                 : 1e-3;
        jac = fd_jacobian(map, ref, h, spec_central);
      }
      stage = "spectrum";
      Spectrum spectrum = spectrum_of(jac);
      write_spectrum_csv(spectrum, spec_out);
      std::printf("wrote %s (%zu eigenvalues, spectral radius %.6f, %s)\n", spec_out.c_str(),
                  spectrum.eigenvalues.size(), spectrum.spectral_radius,
                  spectrum.is_real() ? "real" : "complex");
      return 0;
    }

    if (*beta_cmd) {
      stage = "analysis";
      Spectrum spectrum = read_spectrum_csv(beta_spectrum);
      OptimalSAAResult res = optimal_saa1(spectrum);
      std::string summary = analysis_summary(spectrum, res);
      std::printf("%s", summary.c_str());
      if (!beta_out.empty()) write_text(beta_out, summary);
      return 0;
    }

    if (*sweep_cmd) {
      stage = "sweep";
      Spectrum spectrum = read_spectrum_csv(sweep_spectrum);
      OptimalSAAResult res = brute_force_sweep(spectrum, sweep_m, sweep_lo, sweep_hi, sweep_step);
      std::string summary = analysis_summary(spectrum, res);
      std::printf("%s", summary.c_str());
      if (!sweep_out.empty()) write_text(sweep_out, summary);
      return 0;
    }

    if (*exp_cmd) {
      stage = "config";
      ExperimentConfig config = config_from_text(read_text(exp_config));
      ExperimentSummary summary = run_experiment(config);
      std::printf("%s", summary_to_text(summary).c_str());
      std::printf("artifacts in %s\n", summary.out_dir.c_str());
      return 0;
    }

    if (*report_cmd) {
      stage = "report";
      std::vector<ExperimentSummary> summaries;
      for (const auto& path : report_summaries) summaries.push_back(load_summary(path));
      write_text(report_out, compare_report(summaries));
      std::printf("wrote %s (%zu summaries)\n", report_out.c_str(), summaries.size());
      return 0;
    }
  } catch (const std::exception& e) {
    std::string what = e.what();
    // run_experiment already tags its stages
    if (what.rfind("stage '", 0) == 0)
      std::fprintf(stderr, "error [%s]\n", what.c_str());
    else
      std::fprintf(stderr, "error [stage '%s': %s]\n", stage.c_str(), what.c_str());
    return 1;
  }
  return 0;
}
