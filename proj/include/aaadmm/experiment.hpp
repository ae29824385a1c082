#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aaadmm/anderson.hpp"
#include "aaadmm/jacobian.hpp"
#include "aaadmm/problems.hpp"
#include "aaadmm/theory.hpp"

namespace aaadmm {

/// One solver configuration: plain ADMM, windowed AA(m), or stationary
/// sAA(m) with its coefficient source.
struct SchemeSpec {
  enum class Kind { plain, aa, saa };
  enum class BetaSource { theory, sweep, explicit_beta };

  Kind kind = Kind::plain;
  int m = 0;
  BetaSource source = BetaSource::theory;
  Eigen::VectorXd explicit_beta;

  std::string name() const;
};

/// Parses "plain", "aa<m>", "saa<m>", "saa<m>:theory", "saa<m>:sweep" or
/// "saa<m>:beta=b1,b2,...". Without a source, sAA defaults to theory for
/// m = 1 and sweep otherwise.
SchemeSpec parse_scheme(const std::string& text);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::ridge;
  std::uint64_t seed = 0;
  std::string out_dir;

  // Problem shape; nonpositive values fall back to the per-kind defaults.
  int rows = 0;
  int cols = 0;
  double density = 0.0;
  double reg_lambda = std::numeric_limits<double>::quiet_NaN();
  double penalty_rho = std::numeric_limits<double>::quiet_NaN();
  double alpha_scale = 0.001;
  bool scaled_projection = false;

  std::vector<SchemeSpec> schemes;

  int max_iter = 5000;
  double tol = 1e-12;
  double fd_step = 0.0;  // <= 0 picks the per-problem default; ridge is analytic
  double sweep_lo = -1.0;
  double sweep_hi = 1.0;
  double sweep_step = 0.05;
  double sweep3_step = 0.1;
  bool sweep3_refine = true;
  int window = 20;
  double reference_floor_tol = 1e-15;
  int reference_max_iter = 200000;
};

ExperimentConfig default_experiment_config(ProblemKind problem, std::uint64_t seed,
                                           const std::string& out_dir);

/// Key/value config file; unknown keys are errors.
ExperimentConfig config_from_text(const std::string& text);
std::string config_to_text(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

struct SchemeOutcome {
  SchemeSpec spec;
  std::optional<SAAPlan> plan;
  std::string branch;
  bool sweep_refined = false;
  double predicted_factor = std::numeric_limits<double>::quiet_NaN();
  double measured_factor = std::numeric_limits<double>::quiet_NaN();
  bool measured_reliable = false;
  int iterations = 0;
  TerminalStatus status = TerminalStatus::max_iterations;
  std::string trace_file;
  std::string psi_spectrum_file;
};

struct ExperimentSummary {
  ProblemKind problem = ProblemKind::ridge;
  std::uint64_t seed = 0;
  int rows = 0, cols = 0;
  double density = 0.0, reg_lambda = 0.0, penalty_rho = 0.0, smoothing_alpha = 0.0;
  bool scaled_projection = false;
  double fd_step_used = 0.0;  // 0 means the analytic Jacobian was used
  double rho_q = std::numeric_limits<double>::quiet_NaN();
  bool spectrum_real = true;
  double sigma_min = std::numeric_limits<double>::quiet_NaN();
  double sigma_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> mu_plus;
  std::string branch;  // optimal window-1 branch for this spectrum
  std::string out_dir;
  std::string instance_file, spectrum_file, summary_file, plot_script;
  std::vector<SchemeOutcome> schemes;
};

/// Full pipeline: generate -> reference -> Jacobian -> spectrum ->
/// coefficient analysis/sweeps -> all scheme runs -> CSV artifacts plus a
/// structured summary. Stage failures abort with the stage name; files
/// already produced stay on disk.
ExperimentSummary run_experiment(const ExperimentConfig& config);

std::string summary_to_text(const ExperimentSummary& summary);
ExperimentSummary summary_from_text(const std::string& text);
ExperimentSummary load_summary(const std::string& path);

/// CSV table with one row per (problem, scheme).
std::string compare_report(const std::vector<ExperimentSummary>& summaries);

}  // namespace aaadmm
