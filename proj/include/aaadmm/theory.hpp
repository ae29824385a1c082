#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aaadmm/anderson.hpp"
#include "aaadmm/jacobian.hpp"

namespace aaadmm {

enum class OptimalKind {
  exact_closed_form,
  lower_bound_equality_check,
  lower_bound_only,
  grid_optimum,
};

std::string to_string(OptimalKind kind);

struct CircleParams {
  double center = 0.0;
  double radius = 0.0;
};

/// Outcome of a coefficient analysis: beta vector of length m, the
/// predicted factor rho*, which analysis branch fired, and the circle
/// hosting the mapped complex eigenvalues (window size 1 only).
struct OptimalSAAResult {
  Eigen::VectorXd beta;
  double factor = 0.0;
  OptimalKind kind = OptimalKind::exact_closed_form;
  std::string case_label;
  std::optional<CircleParams> circle;
};

/// Roots of lambda^{m+1} - (1 + sum beta_i) mu lambda^m + beta_1 mu
/// lambda^{m-1} + ... + beta_m mu for m = |beta| in {1, 2, 3}. The m = 1
/// quadratic couples each eigenvalue mu of q' to the eigenvalues lambda of
/// the companion iteration matrix; larger m extends the same pattern.
std::vector<std::complex<double>> lambda_roots(std::complex<double> mu,
                                               const Eigen::VectorXd& beta);

/// Max root modulus of the window-1 quadratic for real mu and beta.
double s_mu(double mu, double beta);

/// argmin_beta S_mu(beta) with its optimal value, for a single real mu.
std::pair<double, double> optimal_beta_single_mu(double mu);

/// Optimal window-1 coefficient for a full spectrum. Real spectra take
/// the closed-form branches (including the mixed-sign subcases); complex
/// spectra whose radius is attained by a real eigenvalue get the
/// lower-bound coefficient, flagged as an equality check when the
/// measured companion radius matches the bound to 1e-6.
OptimalSAAResult optimal_saa1(const Spectrum& spectrum);

/// Center (beta/(1+beta), 0) and radius |beta/(1+beta)| of the circle
/// carrying all complex mapped eigenvalues; beta = -1 is degenerate.
CircleParams circle_params(double beta);

/// Block companion matrix with first block row
/// [(1+sum beta_i) q', -beta_1 q', ..., -beta_m q'] over shifted
/// identities; its spectrum is the union of lambda_roots over sigma(q').
Matrix companion_psi(const Matrix& q_prime, const Eigen::VectorXd& beta);

/// Asymptotic factor of the stationary iteration: max over mu in the
/// spectrum of the max-modulus lambda root.
double rho_saa(const Spectrum& spectrum, const Eigen::VectorXd& beta);

/// Exhaustive grid minimization of rho_saa over {lo, lo+step, ..., hi}^m
/// for m in {2, 3}; ties break to the lexicographically smallest beta.
/// Cells run in parallel with a deterministic reduction.
OptimalSAAResult brute_force_sweep(const Spectrum& spectrum, int m, double lo, double hi,
                                   double step, int threads = 0);

/// Structured text block with spectrum statistics, branch label, beta,
/// predicted factor and provenance.
std::string analysis_summary(const Spectrum& spectrum, const OptimalSAAResult& result);

/// Maps a theory result onto an acceleration plan for the solvers.
SAAPlan plan_from_result(const OptimalSAAResult& result);

}  // namespace aaadmm
