#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aaadmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One sweep of an iterative process viewed as x -> q(x).
///
/// `evaluate` must preserve the dimension and be deterministic: the same
/// input produces bit-identical output within one process configuration.
/// `residual_hooks`, when set, maps a consecutive pair of iterates
/// (x_k, x_{k+1}) to (primal residual norm, dual residual norm).
struct FixedPointMap {
  Eigen::Index dimension = 0;
  std::function<Vector(const Vector&)> evaluate;
  std::function<std::pair<double, double>(const Vector&, const Vector&)> residual_hooks;
};

enum class TerminalStatus { converged, max_iterations, diverged };

struct TraceRecord {
  int k = 0;
  double error_norm = 0.0;
  std::optional<double> primal_residual;
  std::optional<double> dual_residual;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  TerminalStatus terminal_status = TerminalStatus::max_iterations;
  Vector final_iterate;
};

struct ConvergenceEstimate {
  double factor = std::numeric_limits<double>::quiet_NaN();
  int window = 0;
  bool reliable = false;
};

/// Error norms beyond this ceiling flag the run as diverged.
inline constexpr double kBlowUpCeiling = 1e12;

/// Runs x_{k+1} = q(x_k) until convergence, divergence or max_iter.
///
/// With a reference, the error column is ||x_k - reference|| and the run
/// converges when it drops to `tol`; otherwise the step norm
/// ||x_{k+1} - x_k|| plays both roles. Non-finite or blown-up errors end
/// the run as diverged with the trace truncated at the last finite record.
IterationTrace iterate(const FixedPointMap& map, const Vector& x0, int max_iter, double tol,
                       const std::optional<Vector>& reference = std::nullopt);

/// Iterates to (near) machine precision and returns the final iterate.
///
/// Stops once the step norm falls below max(floor_tol, 50*eps*||x||) or
/// fails to decrease over 50 consecutive iterations. Throws on divergence,
/// naming the last finite step norm.
Vector reference_solution(const FixedPointMap& map, const Vector& x0, double floor_tol,
                          int max_iter);

/// Geometric mean of the trailing `window` consecutive error ratios
/// e_{k+1}/e_k, skipping records at or below 100x `accuracy_floor`.
/// `reliable` is false when fewer than `window` usable ratios exist.
ConvergenceEstimate estimate_convergence_factor(const IterationTrace& trace, int window,
                                                double accuracy_floor = 0.0);

/// CSV with header `k,error_norm,primal_residual,dual_residual`; absent
/// residuals are empty cells, floats carry 17 significant digits.
std::string trace_to_csv(const IterationTrace& trace);
IterationTrace trace_from_csv(const std::string& text);
void write_trace_csv(const IterationTrace& trace, const std::string& path);
IterationTrace read_trace_csv(const std::string& path);

}  // namespace aaadmm
